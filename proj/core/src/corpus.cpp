#include "pilot/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "log.hpp"
#include "pilot/error.hpp"

namespace pilot {

using detail::json;
using detail::ordered_json;

char to_char(SourceTag s) {
  switch (s) {
    case SourceTag::O: return 'O';
    case SourceTag::S: return 'S';
    case SourceTag::A: return 'A';
    case SourceTag::G: return 'G';
    case SourceTag::H: return 'H';
  }
  return '?';
}

std::optional<SourceTag> parse_source_tag(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  switch (s[0]) {
    case 'O': return SourceTag::O;
    case 'S': return SourceTag::S;
    case 'A': return SourceTag::A;
    case 'G': return SourceTag::G;
    case 'H': return SourceTag::H;
    default: return std::nullopt;
  }
}

SourceSet SourceSet::parse(std::string_view text) {
  SourceSet set;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      auto tag = parse_source_tag(item);
      if (!tag) throw ValidationError("unknown source tag '" + std::string(item) + "'");
      set.insert(*tag);
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return set;
}

std::size_t SourceSet::size() const {
  std::size_t n = 0;
  for (auto t : kCanonicalSourceOrder) n += contains(t) ? 1 : 0;
  return n;
}

std::vector<SourceTag> SourceSet::ordered() const {
  std::vector<SourceTag> out;
  for (auto t : kCanonicalSourceOrder) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

std::string SourceSet::to_string() const {
  std::string s;
  for (auto t : ordered()) {
    if (!s.empty()) s += ',';
    s += to_char(t);
  }
  return s;
}

std::string metadata_document(const DatasetMetadata& m) {
  std::string doc;
  auto append = [&doc](const std::string& part) {
    if (part.empty()) return;
    if (!doc.empty()) doc += ' ';
    doc += part;
  };
  append(m.title);
  append(m.subtitle);
  append(m.description);
  for (const auto& k : m.keywords) append(k);
  return doc;
}

const SourcedPipeline* CorpusRecord::find(SourceTag s) const {
  for (const auto& p : pipelines) {
    if (p.source == s) return &p;
  }
  return nullptr;
}

void CorpusRecord::validate() const {
  if (metadata.id.empty()) throw ValidationError("record id must be nonempty");
  task.validate();
  SourceSet seen;
  for (const auto& p : pipelines) {
    if (seen.contains(p.source)) {
      throw ValidationError("record '" + metadata.id + "' has two pipelines from source " +
                            std::string(1, to_char(p.source)));
    }
    seen.insert(p.source);
  }
}

Corpus::Corpus(std::vector<CorpusRecord> records, std::filesystem::path base_dir)
    : records_(std::move(records)), base_dir_(std::move(base_dir)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    records_[i].validate();
    auto [it, inserted] = index_.emplace(records_[i].id(), i);
    if (!inserted) {
      throw ConflictError("duplicate dataset id '" + records_[i].id() + "' at records " +
                          std::to_string(it->second + 1) + " and " + std::to_string(i + 1));
    }
  }
}

const CorpusRecord* Corpus::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const CorpusRecord& Corpus::at(std::string_view id) const {
  const auto* r = find(id);
  if (r == nullptr) throw LookupError("unknown dataset id '" + std::string(id) + "'");
  return *r;
}

std::optional<std::filesystem::path> Corpus::data_file(const CorpusRecord& r) const {
  if (!r.metadata.data_path) return std::nullopt;
  std::filesystem::path p(*r.metadata.data_path);
  return p.is_absolute() ? p : base_dir_ / p;
}

// JSON --------------------------------------------------------------------

namespace {

ordered_json task_to_json(const TaskSpec& t) {
  ordered_json j = ordered_json::object();
  j["task_type"] = std::string(to_string(t.task_type));
  j["target_column"] = t.target_column;
  j["metric"] = std::string(to_string(t.metric));
  j["split_seed"] = t.split_seed;
  j["test_fraction"] = t.test_fraction;
  return j;
}

TaskSpec task_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("'task' must be an object");
  TaskSpec t;
  t.task_type = parse_task_type(detail::required<std::string>(j, "task_type", "task"));
  t.target_column = detail::required<std::string>(j, "target_column", "task");
  t.metric = parse_metric(detail::required<std::string>(j, "metric", "task"));
  t.split_seed = detail::required<std::int64_t>(j, "split_seed", "task");
  t.test_fraction = detail::required<double>(j, "test_fraction", "task");
  t.validate();
  return t;
}

ordered_json record_json(const CorpusRecord& r) {
  const auto& m = r.metadata;
  ordered_json j = ordered_json::object();
  j["id"] = m.id;
  j["title"] = m.title;
  j["subtitle"] = m.subtitle;
  j["description"] = m.description;
  j["keywords"] = m.keywords;
  j["data_path"] = m.data_path ? ordered_json(*m.data_path) : ordered_json(nullptr);
  j["task"] = task_to_json(r.task);
  ordered_json pipes = ordered_json::array();
  for (const auto& sp : r.pipelines) {
    ordered_json p = ordered_json::object();
    p["source"] = std::string(1, to_char(sp.source));
    p["pipeline"] = detail::pipeline_to_json(sp.pipeline);
    if (sp.recorded_score) p["recorded_score"] = *sp.recorded_score;
    pipes.push_back(std::move(p));
  }
  j["pipelines"] = std::move(pipes);
  return j;
}

CorpusRecord record_from(const json& j) {
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  CorpusRecord r;
  r.metadata.id = detail::required<std::string>(j, "id", "record");
  r.metadata.title = detail::required<std::string>(j, "title", "record");
  r.metadata.subtitle = j.contains("subtitle") ? detail::required<std::string>(j, "subtitle", "record") : "";
  r.metadata.description = detail::required<std::string>(j, "description", "record");
  r.metadata.keywords = j.contains("keywords")
                            ? detail::required<std::vector<std::string>>(j, "keywords", "record")
                            : std::vector<std::string>{};
  if (auto it = j.find("data_path"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("record: 'data_path' must be a string or null");
    r.metadata.data_path = it->get<std::string>();
  }
  r.task = task_from_json(detail::required<json>(j, "task", "record"));
  if (auto it = j.find("pipelines"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("record: 'pipelines' must be an array");
    for (const auto& pj : *it) {
      SourcedPipeline sp;
      auto tag = parse_source_tag(detail::required<std::string>(pj, "source", "pipeline entry"));
      if (!tag) throw ValidationError("pipeline entry: source must be one of O, S, A, G, H");
      sp.source = *tag;
      sp.pipeline = detail::pipeline_from_json(detail::required<json>(pj, "pipeline", "pipeline entry"));
      if (auto s = pj.find("recorded_score"); s != pj.end() && !s->is_null()) {
        sp.recorded_score = detail::required<double>(pj, "recorded_score", "pipeline entry");
      }
      r.pipelines.push_back(std::move(sp));
    }
  }
  r.validate();
  return r;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << data;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string record_to_json(const CorpusRecord& r) { return detail::dump(record_json(r)); }

CorpusRecord record_from_json(std::string_view line) { return record_from(detail::parse_json(line)); }

Corpus parse_corpus(std::string_view text, std::filesystem::path base_dir) {
  std::vector<CorpusRecord> records;
  std::map<std::string, std::size_t, std::less<>> first_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    CorpusRecord r;
    try {
      r = record_from(detail::parse_json(line, line_no));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    auto [it, inserted] = first_line.emplace(r.id(), line_no);
    if (!inserted) {
      throw ConflictError("duplicate dataset id '" + r.id() + "' on lines " +
                          std::to_string(it->second) + " and " + std::to_string(line_no));
    }
    records.push_back(std::move(r));
  }
  return Corpus(std::move(records), std::move(base_dir));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path), path.parent_path());
}

std::string corpus_to_jsonl(const Corpus& c) {
  std::string out;
  for (const auto& r : c.records()) {
    out += record_to_json(r);
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  write_file(path, corpus_to_jsonl(c));
}

// Evaluations ---------------------------------------------------------------

std::string evaluation_to_json(const EvaluationRecord& e, bool include_timing) {
  ordered_json j = ordered_json::object();
  j["dataset_id"] = e.dataset_id;
  if (e.pipeline_origin) {
    ordered_json o = ordered_json::object();
    o["donor_id"] = e.pipeline_origin->donor_id;
    o["source"] = std::string(1, to_char(e.pipeline_origin->source));
    j["pipeline_origin"] = std::move(o);
  } else {
    j["pipeline_origin"] = "literal";
  }
  j["score"] = e.ok() && std::isfinite(e.score) ? ordered_json(e.score) : ordered_json(nullptr);
  j["metric"] = std::string(to_string(e.metric));
  j["wall_time_ms"] = include_timing ? e.wall_time_ms : 0;
  j["status"] = e.ok() ? "ok" : "failed";
  if (e.failure) j["failure"] = *e.failure;
  j["fold_scores"] = e.fold_scores;
  if (e.pipeline) j["pipeline"] = detail::pipeline_to_json(*e.pipeline);
  return detail::dump(j);
}

EvaluationRecord evaluation_from_json(std::string_view text) {
  const json j = detail::parse_json(text);
  EvaluationRecord e;
  e.dataset_id = detail::required<std::string>(j, "dataset_id", "evaluation");
  const auto& origin = detail::required<json>(j, "pipeline_origin", "evaluation");
  if (origin.is_object()) {
    auto tag = parse_source_tag(detail::required<std::string>(origin, "source", "pipeline_origin"));
    if (!tag) throw ValidationError("pipeline_origin: bad source tag");
    e.pipeline_origin =
        PipelineOrigin{detail::required<std::string>(origin, "donor_id", "pipeline_origin"), *tag};
  } else if (!(origin.is_string() && origin.get<std::string>() == "literal")) {
    throw ValidationError("pipeline_origin must be an object or \"literal\"");
  }
  e.metric = parse_metric(detail::required<std::string>(j, "metric", "evaluation"));
  e.wall_time_ms = detail::required<std::int64_t>(j, "wall_time_ms", "evaluation");
  if (auto f = j.find("failure"); f != j.end()) e.failure = f->get<std::string>();
  const auto& score = detail::required<json>(j, "score", "evaluation");
  e.score = score.is_null() ? std::nan("") : score.get<double>();
  if (auto fs = j.find("fold_scores"); fs != j.end()) e.fold_scores = fs->get<std::vector<double>>();
  if (auto p = j.find("pipeline"); p != j.end()) e.pipeline = detail::pipeline_from_json(*p);
  if (e.wall_time_ms < 0) throw ValidationError("wall_time_ms must be non-negative");
  if (e.ok() && e.metric == Metric::accuracy && !(e.score >= 0.0 && e.score <= 1.0)) {
    throw ValidationError("accuracy must lie in [0, 1]");
  }
  return e;
}

// Tensor view ---------------------------------------------------------------

TensorKey tensor_key(std::string_view dataset_id, const Pipeline& p) {
  TensorKey key{std::string(dataset_id), {}};
  for (const auto& s : p.stages()) {
    auto& slot = key.stages[static_cast<std::size_t>(s.kind)];
    if (!slot.empty()) slot += '+';
    slot += s.primitive;
  }
  for (auto& slot : key.stages) {
    if (slot.empty()) slot = kNoStage;
  }
  return key;
}

TensorView tensor_view(const Corpus& c, std::span<const EvaluationRecord> evaluations) {
  TensorView view;
  for (const auto& e : evaluations) {
    if (c.find(e.dataset_id) == nullptr) {
      throw LookupError("evaluation references unknown dataset '" + e.dataset_id + "'");
    }
    const Pipeline* p = e.pipeline ? &*e.pipeline : nullptr;
    if (p == nullptr) {
      if (!e.pipeline_origin) {
        throw LookupError("literal evaluation of '" + e.dataset_id + "' carries no pipeline");
      }
      const auto& donor = c.at(e.pipeline_origin->donor_id);
      const auto* sp = donor.find(e.pipeline_origin->source);
      if (sp == nullptr) {
        throw LookupError("dataset '" + donor.id() + "' has no pipeline from source " +
                          std::string(1, to_char(e.pipeline_origin->source)));
      }
      p = &sp->pipeline;
    }
    if (!e.ok()) {
      view.warnings.push_back("skipped failed evaluation of '" + e.dataset_id + "'");
      continue;
    }
    auto key = tensor_key(e.dataset_id, *p);
    auto [it, inserted] = view.entries.insert_or_assign(key, e.score);
    if (!inserted) {
      std::string msg = "duplicate tensor entry for dataset '" + e.dataset_id +
                        "' replaced by a later evaluation";
      detail::logger().warn("{}", msg);
      view.warnings.push_back(std::move(msg));
    }
  }
  return view;
}

}  // namespace pilot
