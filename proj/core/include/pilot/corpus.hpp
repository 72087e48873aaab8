#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pilot/pipeline.hpp"
#include "pilot/task.hpp"

namespace pilot {

/// Who produced a pipeline: OBOE, AutoSklearn, AlphaD3M, TPOT or a human.
enum class SourceTag { O, S, A, G, H };

/// H first, then the AutoML systems; the order representations concatenate in.
inline constexpr std::array<SourceTag, 5> kCanonicalSourceOrder = {
    SourceTag::H, SourceTag::O, SourceTag::S, SourceTag::A, SourceTag::G};

char to_char(SourceTag s);
std::optional<SourceTag> parse_source_tag(std::string_view s);

/// Small set of source tags. Iteration follows kCanonicalSourceOrder.
class SourceSet {
 public:
  SourceSet() = default;
  SourceSet(std::initializer_list<SourceTag> tags) {
    for (auto t : tags) insert(t);
  }

  /// Comma-separated tags ("H,G"); empty string is the empty set.
  static SourceSet parse(std::string_view text);

  void insert(SourceTag t) { bits_ |= bit(t); }
  bool contains(SourceTag t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<SourceTag> ordered() const;
  std::string to_string() const;

  bool operator==(const SourceSet&) const = default;

 private:
  static unsigned bit(SourceTag t) { return 1u << static_cast<unsigned>(t); }
  unsigned bits_ = 0;
};

struct DatasetMetadata {
  std::string id;
  std::string title;
  std::string subtitle;
  std::string description;
  std::vector<std::string> keywords;
  std::optional<std::string> data_path;  // relative to the corpus file

  bool operator==(const DatasetMetadata&) const = default;
};

/// Title, subtitle, description and keywords joined by single spaces.
/// Empty fields are skipped so no doubled spaces appear.
std::string metadata_document(const DatasetMetadata& m);

struct SourcedPipeline {
  Pipeline pipeline;
  SourceTag source = SourceTag::H;
  std::optional<double> recorded_score;

  bool operator==(const SourcedPipeline&) const = default;
};

struct CorpusRecord {
  DatasetMetadata metadata;
  TaskSpec task;
  std::vector<SourcedPipeline> pipelines;  // at most one per source

  const std::string& id() const noexcept { return metadata.id; }
  const SourcedPipeline* find(SourceTag s) const;
  bool is_donor() const { return find(SourceTag::H) != nullptr; }
  /// Throws ValidationError on empty id, bad task or duplicate source tags.
  void validate() const;

  bool operator==(const CorpusRecord&) const = default;
};

/// Ordered, id-unique collection of records. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  /// Throws ConflictError on duplicate ids.
  explicit Corpus(std::vector<CorpusRecord> records, std::filesystem::path base_dir = {});

  std::span<const CorpusRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const CorpusRecord* find(std::string_view id) const;
  const CorpusRecord& at(std::string_view id) const;

  /// Directory that relative data paths resolve against.
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  std::optional<std::filesystem::path> data_file(const CorpusRecord& r) const;

  bool operator==(const Corpus& o) const { return records_ == o.records_; }

 private:
  std::vector<CorpusRecord> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::filesystem::path base_dir_;
};

std::string record_to_json(const CorpusRecord& r);
CorpusRecord record_from_json(std::string_view line);

/// JSON Lines corpus; blank lines are ignored.
Corpus parse_corpus(std::string_view text, std::filesystem::path base_dir = {});
Corpus load_corpus(const std::filesystem::path& path);
std::string corpus_to_jsonl(const Corpus& c);
void save_corpus(const Corpus& c, const std::filesystem::path& path);

/// A recommended pipeline's provenance, or "literal" for a user-supplied one.
struct PipelineOrigin {
  std::string donor_id;
  SourceTag source = SourceTag::H;
  bool operator==(const PipelineOrigin&) const = default;
};

struct EvaluationRecord {
  std::string dataset_id;
  std::optional<PipelineOrigin> pipeline_origin;  // nullopt = literal
  double score = 0.0;                             // NaN when failed
  Metric metric = Metric::accuracy;
  std::int64_t wall_time_ms = 0;
  std::optional<std::string> failure;  // cause when the evaluation aborted
  std::optional<Pipeline> pipeline;    // evaluated pipeline, when known
  std::vector<double> fold_scores;

  bool ok() const { return !failure.has_value(); }
};

std::string evaluation_to_json(const EvaluationRecord& e, bool include_timing = true);
EvaluationRecord evaluation_from_json(std::string_view text);

// Sparse performance tensor -------------------------------------------------

inline constexpr std::string_view kNoStage = "none";

/// (dataset, preprocessor, feature extractor, feature selector, estimator,
/// postprocessor). Several stages of one kind join with '+'.
struct TensorKey {
  std::string dataset_id;
  std::array<std::string, 5> stages;

  auto operator<=>(const TensorKey&) const = default;
  bool operator==(const TensorKey&) const = default;
};

TensorKey tensor_key(std::string_view dataset_id, const Pipeline& p);

struct TensorView {
  std::map<TensorKey, double> entries;
  std::vector<std::string> warnings;
};

/// One entry per successful evaluation; later evaluations overwrite earlier
/// ones with the same key and add a warning. Throws LookupError when an
/// evaluation names an unknown dataset or donor pipeline.
TensorView tensor_view(const Corpus& c, std::span<const EvaluationRecord> evaluations);

}  // namespace pilot
