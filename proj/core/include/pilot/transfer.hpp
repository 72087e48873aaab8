#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pilot/corpus.hpp"
#include "pilot/embed.hpp"
#include "pilot/tabular.hpp"

namespace pilot::transfer {

struct Candidate {
  std::string id;
  EmbeddingVector vector;
};

struct Nearest {
  std::string id;
  double distance = 0.0;
};

/// Exact argmin of Euclidean distance by full scan; ties go to the
/// lexicographically smallest id. Throws LookupError when no candidate
/// remains after exclusion, DimensionError on mismatched dims.
Nearest nearest_dataset(const EmbeddingVector& query, std::span<const Candidate> candidates,
                        std::optional<std::string_view> exclude = std::nullopt);

/// Metadata embedding followed by the requested pipeline embeddings in
/// H, O, S, A, G order.
struct Representation {
  std::string dataset_id;
  EmbeddingVector metadata_vec;
  std::vector<std::pair<SourceTag, EmbeddingVector>> pipeline_vecs;
  SourceSet mask;
  EmbeddingVector concat;
};

/// Throws LookupError when the record lacks a requested source.
Representation build_representation(const CorpusRecord& record, const Embedder& e,
                                    const SourceSet& sources);

bool is_eligible_donor(const CorpusRecord& r, const SourceSet& sources);

struct TransferRecommendation {
  std::string query_id;
  std::string donor_id;
  Pipeline pipeline;  // the donor's human pipeline
  double distance = 0.0;
  std::int64_t elapsed_ms = 0;
};

std::string recommendation_to_json(const TransferRecommendation& r, bool include_timing = true);

/// Embedded donors of a corpus: every record holding an H pipeline and all requested sources.
class DonorIndex {
 public:
  DonorIndex(const Corpus& corpus, const Embedder& e, SourceSet sources);

  const SourceSet& sources() const noexcept { return sources_; }
  std::span<const Candidate> candidates() const noexcept { return candidates_; }
  std::size_t size() const noexcept { return candidates_.size(); }
  const Pipeline& human_pipeline(std::string_view donor_id) const;

  Nearest nearest(const EmbeddingVector& query, std::optional<std::string_view> exclude) const;

 private:
  const Corpus* corpus_;
  SourceSet sources_;
  std::vector<Candidate> candidates_;
};

/// Nearest donor by representation distance. A query whose id belongs to the
/// corpus is excluded from its own candidate set. Throws LookupError when no
/// donor is eligible.
TransferRecommendation recommend_direct(const CorpusRecord& query, const Corpus& corpus,
                                        const Embedder& e, const SourceSet& sources = {});
TransferRecommendation recommend_direct(const CorpusRecord& query, const DonorIndex& index,
                                        const Embedder& e);

/// Recommends, then evaluates the donor's pipeline on the query's data.
/// Stage failures come back as a failed record rather than an exception.
EvaluationRecord transfer_and_evaluate(const CorpusRecord& query, const TabularDataset& data,
                                       const Corpus& corpus, const Embedder& e,
                                       const SourceSet& sources, const Protocol& protocol,
                                       std::uint64_t seed);

/// Evaluates a chosen pipeline, turning StageError into a failed record.
EvaluationRecord evaluate_or_fail(const Pipeline& p, const TabularDataset& data,
                                  const CorpusRecord& query, std::optional<PipelineOrigin> origin,
                                  const Protocol& protocol, std::uint64_t seed);

}  // namespace pilot::transfer
