#include "pilot/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pilot/error.hpp"
#include "pilot/random.hpp"

namespace pilot::synthetic {

namespace {

StageSpec stage(StageKind kind, std::string primitive, ParamMap params = {}) {
  return StageSpec{kind, std::move(primitive), std::move(params)};
}

std::string padded(std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, n);
  return buf;
}

template <std::size_t N>
const std::string& pick(Rng& rng, const std::array<std::string, N>& words) {
  return words[rng.below(N)];
}

const std::array<std::string, 10> kSharedWords = {
    "data", "records", "collected", "survey", "study",
    "table", "features", "samples", "observations", "values"};

struct Family {
  std::array<std::string, 10> words;
  std::size_t numeric_cols;
  Pipeline human;
  std::vector<Pipeline> generated;
};

/// Family 0: labels follow two axis-aligned thresholds combined by exclusive
/// or, buried among uninformative columns. Family 1: a random hyperplane over
/// many informative columns. Family 2: inside or outside a sphere.
const std::vector<Family>& families() {
  static const std::vector<Family> fams = [] {
    std::vector<Family> f;
    f.push_back(Family{
        {"rules", "threshold", "policy", "eligibility", "decision", "flag", "approval",
         "criteria", "compliance", "audit"},
        10,
        Pipeline({stage(StageKind::estimator, "decision_tree",
                        {{"max_depth", std::int64_t{6}}, {"min_samples_leaf", std::int64_t{2}}})}),
        {Pipeline({stage(StageKind::estimator, "decision_tree",
                         {{"max_depth", std::int64_t{8}}})}),
         Pipeline({stage(StageKind::preprocessor, "mean_imputer"),
                   stage(StageKind::estimator, "decision_tree",
                         {{"max_depth", std::int64_t{5}}})})}});
    f.push_back(Family{
        {"sensor", "linear", "signal", "calibration", "voltage", "measurement", "instrument",
         "reading", "spectral", "gauge"},
        12,
        Pipeline({stage(StageKind::preprocessor, "standard_scaler"),
                  stage(StageKind::estimator, "logistic_regression")}),
        {Pipeline({stage(StageKind::preprocessor, "standard_scaler"),
                   stage(StageKind::estimator, "logistic_regression",
                         {{"epochs", std::int64_t{100}}})}),
         Pipeline({stage(StageKind::preprocessor, "min_max_scaler"),
                   stage(StageKind::estimator, "logistic_regression",
                         {{"learning_rate", 0.5}})})}});
    f.push_back(Family{
        {"radius", "orbit", "distance", "geospatial", "location", "proximity", "center", "ring",
         "spatial", "neighbourhood"},
        2,
        Pipeline({stage(StageKind::preprocessor, "standard_scaler"),
                  stage(StageKind::estimator, "knn_classifier", {{"k", std::int64_t{7}}})}),
        {Pipeline({stage(StageKind::preprocessor, "standard_scaler"),
                   stage(StageKind::estimator, "knn_classifier", {{"k", std::int64_t{5}}})}),
         Pipeline({stage(StageKind::preprocessor, "min_max_scaler"),
                   stage(StageKind::estimator, "knn_classifier", {{"k", std::int64_t{9}}})})}});
    return f;
  }();
  return fams;
}

TabularDataset family_data(std::size_t family, std::size_t rows, Rng& rng) {
  const std::size_t cols = families()[family].numeric_cols;
  TabularDataset d;
  for (std::size_t c = 0; c < cols; ++c) {
    d.column_names.push_back("x" + std::to_string(c + 1));
    d.column_kinds.push_back(ColumnKind::numeric);
  }
  std::vector<double> w(cols);
  for (auto& v : w) v = rng.normal();
  const double t1 = rng.uniform(-0.4, 0.4);
  const double t2 = rng.uniform(-0.4, 0.4);
  Labels labels;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<Cell> row;
    std::vector<double> x(cols);
    for (auto& v : x) {
      v = family == 2 ? rng.normal() : rng.uniform(-1.0, 1.0);
      row.emplace_back(v);
    }
    bool positive = false;
    if (family == 0) {
      positive = (x[0] > t1) != (x[1] > t2);
    } else if (family == 1) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) s += w[c] * x[c];
      positive = s > 0.0;
    } else {
      double s = 0.0;
      for (double v : x) s += v * v;
      positive = s < 1.3863;  // median of a chi-squared variable with 2 degrees of freedom
    }
    d.rows.push_back(std::move(row));
    labels.push_back(positive ? "yes" : "no");
  }
  d.target = std::move(labels);
  return d;
}

DatasetMetadata family_metadata(std::string id, std::size_t family, Rng& rng) {
  const auto& words = families()[family].words;
  DatasetMetadata m;
  m.id = std::move(id);
  m.title = pick(rng, words) + " " + pick(rng, words) + " " + pick(rng, kSharedWords);
  m.subtitle = pick(rng, kSharedWords) + " of " + pick(rng, words);
  std::string desc;
  for (int i = 0; i < 10; ++i) {
    if (!desc.empty()) desc += ' ';
    desc += rng.uniform() < 0.6 ? pick(rng, words) : pick(rng, kSharedWords);
  }
  m.description = desc;
  for (int i = 0; i < 3; ++i) m.keywords.push_back(pick(rng, words));
  return m;
}

}  // namespace

TabularDataset separable_blobs(std::size_t rows, double margin, std::uint64_t seed) {
  if (rows < 2) throw ValidationError("separable_blobs needs at least two rows");
  Rng rng(seed);
  TabularDataset d;
  d.column_names = {"x", "y"};
  d.column_kinds = {ColumnKind::numeric, ColumnKind::numeric};
  Labels labels;
  for (std::size_t r = 0; r < rows; ++r) {
    const bool positive = r % 2 == 1;
    const double centre = positive ? 2.0 : -2.0;
    double x = 0.0;
    double y = 0.0;
    double signed_dist = 0.0;
    do {
      x = centre + rng.normal();
      y = centre + rng.normal();
      signed_dist = (x + y) / std::sqrt(2.0);
    } while (positive ? signed_dist < margin : signed_dist > -margin);
    d.rows.push_back({Cell{x}, Cell{y}});
    labels.push_back(positive ? "pos" : "neg");
  }
  d.target = std::move(labels);
  return d;
}

TabularDataset label_consistent(std::size_t rows, std::size_t numeric_cols,
                                std::size_t categorical_cols, std::size_t classes,
                                std::uint64_t seed) {
  if (rows == 0 || classes == 0 || numeric_cols + categorical_cols == 0) {
    throw ValidationError("label_consistent needs rows, columns and classes");
  }
  Rng rng(seed);
  static const std::array<std::string, 4> kLevels = {"u", "v", "w", "z"};
  TabularDataset d;
  std::vector<std::uint64_t> coef(numeric_cols + categorical_cols);
  for (auto& c : coef) c = rng.next() % 1000003;
  for (std::size_t c = 0; c < numeric_cols; ++c) {
    d.column_names.push_back("n" + std::to_string(c));
    d.column_kinds.push_back(ColumnKind::numeric);
  }
  for (std::size_t c = 0; c < categorical_cols; ++c) {
    d.column_names.push_back("c" + std::to_string(c));
    d.column_kinds.push_back(ColumnKind::categorical);
  }
  Labels labels;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<Cell> row;
    std::uint64_t h = 0;
    for (std::size_t c = 0; c < numeric_cols; ++c) {
      const auto v = rng.below(10);
      row.emplace_back(static_cast<double>(v) * 0.5);
      h += coef[c] * (v + 1);
    }
    for (std::size_t c = 0; c < categorical_cols; ++c) {
      const auto v = rng.below(kLevels.size());
      row.emplace_back(kLevels[v]);
      h += coef[numeric_cols + c] * (v + 7);
    }
    // A fixed function of the features, so equal rows cannot disagree.
    h ^= h >> 17;
    h *= 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    labels.push_back("k" + std::to_string(h % classes));
    d.rows.push_back(std::move(row));
  }
  d.target = std::move(labels);
  return d;
}

ClusteredCorpus clustered_corpus(const ClusteredOptions& options) {
  if (options.clusters == 0 || options.per_cluster == 0 || options.rows < 10) {
    throw ValidationError("clustered corpus needs clusters, members and at least 10 rows");
  }
  ClusteredCorpus out;
  std::vector<CorpusRecord> records;
  std::size_t index = 0;
  for (std::size_t c = 0; c < options.clusters; ++c) {
    const std::size_t family = c % families().size();
    for (std::size_t k = 0; k < options.per_cluster; ++k, ++index) {
      Rng rng = Rng::derive(options.seed, index);
      const std::string id = "c" + std::to_string(c) + "-d" + padded(k, 2);
      CorpusRecord r;
      r.metadata = family_metadata(id, family, rng);
      r.metadata.data_path = "data/" + id + ".csv";
      r.task = TaskSpec::classification("label", 0.2, static_cast<std::int64_t>(index));
      r.pipelines.push_back({families()[family].human, SourceTag::H, std::nullopt});
      const auto& generated = families()[family].generated;
      r.pipelines.push_back({generated[rng.below(generated.size())], SourceTag::G, std::nullopt});
      out.data.emplace(id, family_data(family, options.rows, rng));
      out.cluster.emplace(id, c);
      records.push_back(std::move(r));
    }
  }
  out.corpus = Corpus(std::move(records));
  return out;
}

std::filesystem::path write_clustered(const ClusteredCorpus& c, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "data", ec);
  if (ec) throw IoError("cannot create '" + (dir / "data").string() + "': " + ec.message());
  for (const auto& [id, data] : c.data) {
    const auto path = dir / "data" / (id + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_csv(data, "label");
  }
  const auto corpus_path = dir / "corpus.jsonl";
  save_corpus(c.corpus, corpus_path);
  return corpus_path;
}

Corpus random_corpus(std::size_t records, std::uint64_t seed) {
  static const std::array<std::string, 24> kWords = {
      "credit",  "housing", "weather", "clinical", "retail",  "traffic",
      "energy",  "genome",  "fraud",   "churn",    "soil",    "airline",
      "student", "sports",  "market",  "sensor",   "network", "image",
      "census",  "wine",    "insurance", "loan",   "forest",  "ocean"};
  static const std::vector<Pipeline> kTemplates = {
      Pipeline({stage(StageKind::estimator, "decision_tree")}),
      Pipeline({stage(StageKind::preprocessor, "standard_scaler"),
                stage(StageKind::estimator, "logistic_regression")}),
      Pipeline({stage(StageKind::preprocessor, "mean_imputer"),
                stage(StageKind::estimator, "gaussian_naive_bayes")}),
      Pipeline({stage(StageKind::preprocessor, "min_max_scaler"),
                stage(StageKind::feature_selector, "select_k_best", {{"k", std::int64_t{3}}}),
                stage(StageKind::estimator, "knn_classifier")}),
      Pipeline({stage(StageKind::preprocessor, "one_hot_encoder"),
                stage(StageKind::feature_selector, "variance_threshold"),
                stage(StageKind::estimator, "decision_tree", {{"max_depth", std::int64_t{4}}}),
                stage(StageKind::postprocessor, "identity_postprocessor")}),
  };
  static const std::array<SourceTag, 4> kAutoMl = {SourceTag::O, SourceTag::S, SourceTag::A,
                                                   SourceTag::G};
  Rng rng(seed);
  std::vector<CorpusRecord> out;
  for (std::size_t i = 0; i < records; ++i) {
    CorpusRecord r;
    r.metadata.id = "r" + padded(i, 5);
    r.metadata.title = pick(rng, kWords) + " " + pick(rng, kWords);
    r.metadata.subtitle = pick(rng, kWords);
    for (int w = 0; w < 8; ++w) {
      if (w > 0) r.metadata.description += ' ';
      r.metadata.description += pick(rng, kWords);
    }
    const auto nkw = rng.below(4);
    for (std::uint64_t k = 0; k < nkw; ++k) r.metadata.keywords.push_back(pick(rng, kWords));
    r.task = TaskSpec::classification("label");
    r.pipelines.push_back({kTemplates[rng.below(kTemplates.size())], SourceTag::H, std::nullopt});
    for (auto tag : kAutoMl) {
      if (rng.uniform() < 0.5) {
        r.pipelines.push_back({kTemplates[rng.below(kTemplates.size())], tag, std::nullopt});
      }
    }
    out.push_back(std::move(r));
  }
  return Corpus(std::move(out));
}

}  // namespace pilot::synthetic
