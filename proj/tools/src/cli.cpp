#include "pilot_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pilot/corpus.hpp"
#include "pilot/embed.hpp"
#include "pilot/engine.hpp"
#include "pilot/error.hpp"
#include "pilot/metricnet.hpp"
#include "pilot/pipeline.hpp"
#include "pilot/random.hpp"
#include "pilot/synthetic.hpp"
#include "pilot/tabular.hpp"
#include "pilot/transfer.hpp"

namespace pilot::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

std::unique_ptr<Embedder> make_embedder(const std::string& spec, std::size_t dim) {
  if (spec == "builtin") return std::make_unique<HashedNGramEmbedder>(dim);
  constexpr std::string_view kExternal = "external:";
  if (spec.rfind(kExternal, 0) == 0) {
    return std::make_unique<ExternalVectorStore>(load_vectors(spec.substr(kExternal.size())));
  }
  throw ValidationError("unknown embedder '" + spec + "' (expected builtin or external:<path>)");
}

/// Options shared by commands that read a corpus and embed it.
struct CorpusOptions {
  std::string corpus;
  std::string embedder = "builtin";
  std::size_t dim = kDefaultEmbeddingDim;
  std::string sources;
  std::string protocol = "kfold:5";
  std::uint64_t seed = 0;
  std::string format = "json";
  bool no_timing = false;
};

void add_embedder_options(CLI::App* cmd, CorpusOptions& o) {
  cmd->add_option("--embedder", o.embedder, "builtin or external:<vector file>")
      ->capture_default_str();
  cmd->add_option("--dim", o.dim, "Dimension of the builtin embedder")->capture_default_str();
  cmd->add_option("--sources", o.sources, "Pipeline sources in the representation, e.g. G or O,G");
}

void add_format_options(CLI::App* cmd, CorpusOptions& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_flag("--no-timing", o.no_timing, "Report timings as 0 so output is byte-stable");
}

// validate -----------------------------------------------------------------

int cmd_validate(const std::string& pipeline_file, const std::string& corpus_file,
                 std::ostream& out) {
  if (!corpus_file.empty()) {
    const auto c = load_corpus(corpus_file);
    out << "corpus ok: " << c.size() << " records\n";
  }
  if (!pipeline_file.empty()) {
    const auto p = parse_pipeline(read_file(pipeline_file));
    out << "pipeline ok: " << p.size() << " stage" << (p.size() == 1 ? "" : "s") << '\n';
  }
  return kOk;
}

// run ----------------------------------------------------------------------

struct RunOptions {
  std::string pipeline;
  std::string data;
  std::string target;
  std::string task = "classification";
  double test_fraction = 0.2;
};

void print_evaluation(const EvaluationRecord& e, const CorpusOptions& o, std::ostream& out) {
  if (o.format == "json") {
    out << evaluation_to_json(e, !o.no_timing) << '\n';
    return;
  }
  out << "dataset:  " << e.dataset_id << '\n'
      << "metric:   " << to_string(e.metric) << '\n'
      << "status:   " << (e.ok() ? "ok" : "failed") << '\n';
  if (e.ok()) out << "score:    " << format_real(e.score) << '\n';
  if (e.failure) out << "failure:  " << *e.failure << '\n';
  out << "folds:    ";
  for (std::size_t i = 0; i < e.fold_scores.size(); ++i) {
    out << (i ? " " : "") << format_real(e.fold_scores[i]);
  }
  out << '\n';
  if (!o.no_timing) out << "time_ms:  " << e.wall_time_ms << '\n';
}

int cmd_run(const RunOptions& r, const CorpusOptions& o, std::ostream& out) {
  const auto p = parse_pipeline(read_file(r.pipeline));
  const auto task_type = parse_task_type(r.task);
  TaskSpec task = task_type == TaskType::classification
                      ? TaskSpec::classification(r.target, r.test_fraction,
                                                 static_cast<std::int64_t>(o.seed))
                      : TaskSpec::regression(r.target, r.test_fraction,
                                             static_cast<std::int64_t>(o.seed));
  task.validate();
  const auto data = load_csv(r.data, r.target, task_type);
  auto e = engine::evaluate(p, data, task, Protocol::parse(o.protocol), o.seed);
  e.dataset_id = std::filesystem::path(r.data).stem().string();
  print_evaluation(e, o, out);
  return kOk;
}

// recommend / train --------------------------------------------------------

struct LearnOptions {
  std::size_t epochs = metricnet::TrainConfig{}.epochs;
  std::string hidden = "256,128,64";
  std::size_t batch_size = metricnet::TrainConfig{}.batch_size;
  double learning_rate = metricnet::TrainConfig{}.learning_rate;
  std::string target_mode = "pipeline_distance";
};

void add_learn_options(CLI::App* cmd, LearnOptions& l) {
  cmd->add_option("--epochs", l.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--hidden", l.hidden, "Comma-separated hidden layer widths")->capture_default_str();
  cmd->add_option("--batch-size", l.batch_size, "Minibatch size")->capture_default_str();
  cmd->add_option("--learning-rate", l.learning_rate, "Adam step size")->capture_default_str();
  cmd->add_option("--target-mode", l.target_mode, "pipeline_distance or performance")
      ->check(CLI::IsMember({"pipeline_distance", "performance"}))
      ->capture_default_str();
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) throw ValidationError("bad layer width '" + item + "'");
    widths.push_back(v);
  }
  return widths;
}

metricnet::TrainConfig make_config(const LearnOptions& l, std::uint64_t seed) {
  metricnet::TrainConfig c;
  c.epochs = l.epochs;
  c.hidden = parse_widths(l.hidden);
  c.batch_size = l.batch_size;
  c.learning_rate = l.learning_rate;
  c.seed = seed;
  c.target_mode = metricnet::parse_target_mode(l.target_mode);
  c.validate();
  return c;
}

metricnet::PerformanceFn performance_for(const Corpus& c, const metricnet::TrainConfig& config,
                                         const CorpusOptions& o) {
  if (config.target_mode != metricnet::TargetMode::performance) return {};
  return metricnet::performance_from_data(c, Protocol::parse(o.protocol), o.seed);
}

/// A query given as a full corpus record, or as bare metadata fields.
CorpusRecord read_query(const std::string& path) {
  auto text = read_file(path);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("query file is not a JSON object");
  if (j.contains("task")) return record_from_json(text);
  CorpusRecord r;
  r.metadata.id = j.value("id", std::string("query"));
  r.metadata.title = j.value("title", std::string());
  r.metadata.subtitle = j.value("subtitle", std::string());
  r.metadata.description = j.value("description", std::string());
  r.metadata.keywords = j.value("keywords", std::vector<std::string>{});
  r.task = TaskSpec::classification("target");
  return r;
}

void print_recommendation(const transfer::TransferRecommendation& r, const CorpusOptions& o,
                          std::ostream& out) {
  if (o.format == "json") {
    out << transfer::recommendation_to_json(r, !o.no_timing) << '\n';
    return;
  }
  out << "query:      " << r.query_id << '\n'
      << "donor:      " << r.donor_id << '\n'
      << "distance:   " << format_real(r.distance) << '\n';
  if (!o.no_timing) out << "elapsed_ms: " << r.elapsed_ms << '\n';
  out << "pipeline:\n";
  for (const auto& line : canonical_text(r.pipeline)) out << "  " << line << '\n';
}

struct RecommendOptions {
  std::string id;
  std::string query;
  std::string mode = "direct";
  std::string checkpoint;
};

int cmd_recommend(const RecommendOptions& r, const LearnOptions& l, const CorpusOptions& o,
                  const CLI::App& cmd, std::ostream& out) {
  if (r.id.empty() == r.query.empty()) throw ValidationError("give exactly one of --id or --query");
  const auto corpus = load_corpus(o.corpus);
  const auto embedder = make_embedder(o.embedder, o.dim);
  auto sources = SourceSet::parse(o.sources);
  const CorpusRecord query = r.id.empty() ? read_query(r.query) : corpus.at(r.id);

  if (r.mode == "direct") {
    print_recommendation(transfer::recommend_direct(query, corpus, *embedder, sources), o, out);
    return kOk;
  }
  metricnet::MetricNetwork net;
  if (!r.checkpoint.empty()) {
    auto ckpt = metricnet::load_checkpoint(r.checkpoint);
    if (cmd.count("--sources") == 0) {
      sources = ckpt.sources;
    } else if (!(sources == ckpt.sources)) {
      throw ValidationError("checkpoint was trained with sources '" + ckpt.sources.to_string() +
                            "', not '" + sources.to_string() + "'");
    }
    if (ckpt.embedding_dim != embedder->dim() || ckpt.embedder != embedder->name()) {
      throw ValidationError("checkpoint expects the " + ckpt.embedder + " embedder with dim " +
                            std::to_string(ckpt.embedding_dim));
    }
    net = std::move(ckpt.net);
  } else {
    const auto config = make_config(l, o.seed);
    net = metricnet::train(corpus, *embedder, sources, query.id(), config,
                           performance_for(corpus, config, o))
              .net;
  }
  print_recommendation(metricnet::recommend_learned(query, corpus, net, *embedder, sources), o,
                       out);
  return kOk;
}

int cmd_train(const std::string& exclude, const std::string& out_path, const LearnOptions& l,
              const CorpusOptions& o, std::ostream& out) {
  const auto corpus = load_corpus(o.corpus);
  const auto embedder = make_embedder(o.embedder, o.dim);
  const auto sources = SourceSet::parse(o.sources);
  const auto config = make_config(l, o.seed);
  std::optional<std::string_view> excluded;
  if (!exclude.empty()) excluded = exclude;
  const auto result = metricnet::train(corpus, *embedder, sources, excluded, config,
                                       performance_for(corpus, config, o));
  metricnet::save_checkpoint({result.net, config, sources, embedder->name(), embedder->dim()},
                             out_path);
  ordered_json j = ordered_json::object();
  j["checkpoint"] = out_path;
  j["initial_loss"] = result.initial_loss;
  j["final_loss"] = result.final_loss;
  out << (o.format == "json" ? j.dump() : "initial_loss " + format_real(result.initial_loss) +
                                              "\nfinal_loss   " + format_real(result.final_loss))
      << '\n';
  return kOk;
}

// benchmark ----------------------------------------------------------------

struct Cell {
  std::optional<double> score;
  std::string donor_id;
  std::string failure;
};

ordered_json cell_json(const Cell& c) {
  ordered_json j = ordered_json::object();
  j["status"] = c.score ? "ok" : "failed";
  j["score"] = c.score ? ordered_json(*c.score) : ordered_json(nullptr);
  j["donor_id"] = c.donor_id.empty() ? ordered_json(nullptr) : ordered_json(c.donor_id);
  if (!c.score) j["failure"] = c.failure;
  return j;
}

Cell cell_from(const EvaluationRecord& e, std::string donor) {
  Cell c;
  c.donor_id = std::move(donor);
  if (e.ok()) {
    c.score = e.score;
  } else {
    c.failure = e.failure.value_or("failed");
  }
  return c;
}

struct BenchmarkOptions {
  std::vector<std::string> pe_sources;
  bool learned = false;
  std::string out;
};

int cmd_benchmark(const BenchmarkOptions& b, const LearnOptions& l, const CorpusOptions& o,
                  std::ostream& out) {
  const auto corpus = load_corpus(o.corpus);
  const auto embedder = make_embedder(o.embedder, o.dim);
  const auto protocol = Protocol::parse(o.protocol);

  std::vector<std::string> columns = {"Human", "Ours-DE"};
  std::vector<transfer::DonorIndex> pe_indices;
  for (const auto& s : b.pe_sources) {
    const auto set = SourceSet::parse(s);
    columns.push_back("Ours-PE(" + set.to_string() + ")");
    pe_indices.emplace_back(corpus, *embedder, set);
  }
  columns.push_back("Random");
  if (b.learned) columns.push_back("Ours-LM");
  const transfer::DonorIndex de_index(corpus, *embedder, SourceSet{});
  const auto config = b.learned ? make_config(l, o.seed) : metricnet::TrainConfig{};

  ordered_json rows = ordered_json::array();
  std::vector<double> sums(columns.size(), 0.0);
  std::vector<std::size_t> counts(columns.size(), 0);
  std::vector<std::vector<Cell>> table;
  std::size_t index = 0;
  for (const auto& record : corpus.records()) {
    std::vector<Cell> cells(columns.size());
    auto fail_all = [&](const std::string& why) {
      for (auto& c : cells) c.failure = why;
    };
    std::optional<TabularDataset> data;
    try {
      const auto path = corpus.data_file(record);
      if (!path) throw LookupError("dataset '" + record.id() + "' has no local data");
      if (!record.is_donor()) throw LookupError("dataset '" + record.id() + "' has no human pipeline");
      data = load_csv(*path, record.task.target_column, record.task.task_type);
    } catch (const Error& e) {
      fail_all(e.what());
    }
    if (data) {
      auto evaluate = [&](const Pipeline& p, const std::string& donor) {
        return cell_from(transfer::evaluate_or_fail(p, *data, record, PipelineOrigin{donor, SourceTag::H},
                                                    protocol, o.seed),
                         donor);
      };
      auto guarded = [&](std::size_t col, auto&& f) {
        try {
          cells[col] = f();
        } catch (const Error& e) {
          cells[col].failure = e.what();
        }
      };
      std::size_t col = 0;
      guarded(col++, [&] { return evaluate(record.find(SourceTag::H)->pipeline, record.id()); });
      guarded(col++, [&] {
        const auto rec = transfer::recommend_direct(record, de_index, *embedder);
        return evaluate(rec.pipeline, rec.donor_id);
      });
      for (const auto& idx : pe_indices) {
        guarded(col++, [&] {
          const auto rec = transfer::recommend_direct(record, idx, *embedder);
          return evaluate(rec.pipeline, rec.donor_id);
        });
      }
      guarded(col++, [&] {
        std::vector<const transfer::Candidate*> pool;
        for (const auto& c : de_index.candidates()) {
          if (c.id != record.id()) pool.push_back(&c);
        }
        if (pool.empty()) throw LookupError("no donor other than the query");
        Rng rng = Rng::derive(o.seed, index);
        const auto& donor = pool[rng.below(pool.size())]->id;
        return evaluate(de_index.human_pipeline(donor), donor);
      });
      if (b.learned) {
        guarded(col++, [&] {
          const auto net = metricnet::train(corpus, *embedder, SourceSet{}, record.id(), config,
                                            performance_for(corpus, config, o))
                               .net;
          const auto rec = metricnet::recommend_learned(record, corpus, net, *embedder, SourceSet{});
          return evaluate(rec.pipeline, rec.donor_id);
        });
      }
    }
    ordered_json row = ordered_json::object();
    row["dataset_id"] = record.id();
    row["metric"] = std::string(to_string(record.task.metric));
    ordered_json cj = ordered_json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      cj[columns[c]] = cell_json(cells[c]);
      if (cells[c].score) {
        sums[c] += *cells[c].score;
        ++counts[c];
      }
    }
    row["cells"] = std::move(cj);
    rows.push_back(std::move(row));
    table.push_back(std::move(cells));
    ++index;
  }

  ordered_json doc = ordered_json::object();
  doc["corpus"] = o.corpus;
  doc["embedder"] = embedder->name();
  doc["dim"] = embedder->dim();
  doc["protocol"] = protocol.to_string();
  doc["seed"] = o.seed;
  doc["columns"] = columns;
  doc["rows"] = std::move(rows);
  ordered_json means = ordered_json::object();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    means[columns[c]] = counts[c] ? ordered_json(sums[c] / static_cast<double>(counts[c]))
                                  : ordered_json(nullptr);
  }
  doc["means"] = std::move(means);
  const auto text = doc.dump();
  if (!b.out.empty()) write_file(b.out, text + "\n");

  if (o.format == "json") {
    out << text << '\n';
    return kOk;
  }
  std::size_t id_width = 7;
  for (const auto& r : corpus.records()) id_width = std::max(id_width, r.id().size());
  std::vector<std::size_t> widths;
  out << std::left << std::setw(static_cast<int>(id_width) + 2) << "dataset";
  for (const auto& c : columns) {
    widths.push_back(std::max<std::size_t>(c.size(), 8) + 2);
    out << std::setw(static_cast<int>(widths.back())) << c;
  }
  out << '\n';
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string("failed");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << std::setw(static_cast<int>(id_width) + 2) << corpus.records()[r].id();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << std::setw(static_cast<int>(widths[c])) << fmt(table[r][c].score);
    }
    out << '\n';
  }
  out << std::setw(static_cast<int>(id_width) + 2) << "mean";
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << std::setw(static_cast<int>(widths[c]))
        << fmt(counts[c] ? std::optional<double>(sums[c] / static_cast<double>(counts[c]))
                         : std::nullopt);
  }
  out << '\n';
  return kOk;
}

// synth --------------------------------------------------------------------

int cmd_synth_clustered(const synthetic::ClusteredOptions& c, const std::string& dir,
                        std::ostream& out) {
  const auto corpus = synthetic::clustered_corpus(c);
  out << synthetic::write_clustered(corpus, dir).string() << '\n';
  return kOk;
}

int cmd_synth_random(std::size_t records, std::uint64_t seed, const std::string& path,
                     std::ostream& out) {
  save_corpus(synthetic::random_corpus(records, seed), path);
  out << path << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recommend a pipeline for a tabular dataset by borrowing one from its nearest neighbour in a corpus",
               "pipeline-pilot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pipeline-pilot 0.1.0");

  CorpusOptions o;
  RunOptions run_opts;
  RecommendOptions rec_opts;
  LearnOptions learn;
  BenchmarkOptions bench;
  std::string pipeline_file;
  std::string exclude;
  std::string out_path;

  auto* validate = app.add_subcommand("validate", "Check a pipeline file and/or a corpus");
  validate->add_option("pipeline", pipeline_file, "Pipeline JSON file");
  validate->add_option("--corpus", o.corpus, "Corpus JSONL file");

  auto* pipeline_cmd = app.add_subcommand("pipeline", "Pipeline utilities");
  pipeline_cmd->require_subcommand(1);
  auto* pipeline_validate = pipeline_cmd->add_subcommand("validate", "Check a pipeline file");
  pipeline_validate->add_option("file", pipeline_file, "Pipeline JSON file")->required();

  auto* run_cmd = app.add_subcommand("run", "Evaluate a pipeline on a CSV dataset");
  run_cmd->add_option("--pipeline", run_opts.pipeline, "Pipeline JSON file")->required();
  run_cmd->add_option("--data", run_opts.data, "CSV file with a header row")->required();
  run_cmd->add_option("--target", run_opts.target, "Target column")->required();
  run_cmd->add_option("--task", run_opts.task, "classification or regression")
      ->check(CLI::IsMember({"classification", "regression"}))
      ->capture_default_str();
  run_cmd->add_option("--test-fraction", run_opts.test_fraction, "Holdout fraction")
      ->capture_default_str();
  run_cmd->add_option("--protocol", o.protocol, "holdout or kfold:<k>")->capture_default_str();
  add_format_options(run_cmd, o);

  auto* recommend = app.add_subcommand("recommend", "Recommend a pipeline for a dataset");
  recommend->add_option("--corpus", o.corpus, "Corpus JSONL file")->required();
  recommend->add_option("--id", rec_opts.id, "Query a corpus member (it is excluded as a donor)");
  recommend->add_option("--query", rec_opts.query, "JSON file with the query's metadata");
  recommend->add_option("--mode", rec_opts.mode, "direct or learned")
      ->check(CLI::IsMember({"direct", "learned"}))
      ->capture_default_str();
  recommend->add_option("--checkpoint", rec_opts.checkpoint,
                        "Trained metric network; without it learned mode trains first");
  recommend->add_option("--protocol", o.protocol, "Protocol for performance targets");
  add_embedder_options(recommend, o);
  add_learn_options(recommend, learn);
  add_format_options(recommend, o);

  auto* train = app.add_subcommand("train", "Train a metric network and save a checkpoint");
  train->add_option("--corpus", o.corpus, "Corpus JSONL file")->required();
  train->add_option("--exclude", exclude, "Dataset id held out of training");
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--protocol", o.protocol, "Protocol for performance targets");
  add_embedder_options(train, o);
  add_learn_options(train, learn);
  add_format_options(train, o);

  auto* benchmark = app.add_subcommand("benchmark", "Leave-one-out transfer table");
  benchmark->add_option("--corpus", o.corpus, "Corpus JSONL file with local data")->required();
  benchmark->add_option("--embedder", o.embedder, "builtin or external:<vector file>")
      ->capture_default_str();
  benchmark->add_option("--dim", o.dim, "Dimension of the builtin embedder")
      ->capture_default_str();
  benchmark->add_option("--sources", bench.pe_sources,
                        "Source set for one Ours-PE column; repeat for more columns");
  benchmark->add_option("--protocol", o.protocol, "holdout or kfold:<k>")->capture_default_str();
  benchmark->add_flag("--learned", bench.learned, "Add a learned-metric column (trains per row)");
  benchmark->add_option("--out", bench.out, "Also write the JSON artifact here");
  add_learn_options(benchmark, learn);
  add_format_options(benchmark, o);
  benchmark->get_option("--format")->default_str("table");

  synthetic::ClusteredOptions clustered;
  std::size_t records = 1000;
  auto* synth = app.add_subcommand("synth", "Generate synthetic corpora");
  synth->require_subcommand(1);
  auto* synth_clustered = synth->add_subcommand("clustered", "Clustered corpus with CSV data");
  synth_clustered->add_option("--out", out_path, "Output directory")->required();
  synth_clustered->add_option("--clusters", clustered.clusters)->capture_default_str();
  synth_clustered->add_option("--per-cluster", clustered.per_cluster)->capture_default_str();
  synth_clustered->add_option("--rows", clustered.rows)->capture_default_str();
  synth_clustered->add_option("--seed", clustered.seed)->capture_default_str();
  auto* synth_random = synth->add_subcommand("random", "Metadata-only corpus");
  synth_random->add_option("--out", out_path, "Output JSONL file")->required();
  synth_random->add_option("--records", records)->capture_default_str();
  synth_random->add_option("--seed", o.seed)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (validate->parsed()) {
      if (pipeline_file.empty() && o.corpus.empty()) {
        throw ValidationError("nothing to validate: give a pipeline file or --corpus");
      }
      return cmd_validate(pipeline_file, o.corpus, out);
    }
    if (pipeline_validate->parsed()) return cmd_validate(pipeline_file, "", out);
    if (run_cmd->parsed()) return cmd_run(run_opts, o, out);
    if (recommend->parsed()) return cmd_recommend(rec_opts, learn, o, *recommend, out);
    if (train->parsed()) return cmd_train(exclude, out_path, learn, o, out);
    if (benchmark->parsed()) {
      if (benchmark->count("--format") == 0) o.format = "table";
      return cmd_benchmark(bench, learn, o, out);
    }
    if (synth_clustered->parsed()) return cmd_synth_clustered(clustered, out_path, out);
    if (synth_random->parsed()) return cmd_synth_random(records, o.seed, out_path, out);
  } catch (const StageError& e) {
    err << "error: " << e.what() << '\n';
    return kExecution;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace pilot::cli
