#include "pilot/transfer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "log.hpp"
#include "pilot/engine.hpp"
#include "pilot/error.hpp"

namespace pilot::transfer {

Nearest nearest_dataset(const EmbeddingVector& query, std::span<const Candidate> candidates,
                        std::optional<std::string_view> exclude) {
  const Candidate* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (exclude && c.id == *exclude) continue;
    const double d = distance(query, c.vector);
    if (best == nullptr || d < best_distance || (d == best_distance && c.id < best->id)) {
      best = &c;
      best_distance = d;
    }
  }
  if (best == nullptr) throw LookupError("no candidate datasets to compare against");
  return {best->id, best_distance};
}

Representation build_representation(const CorpusRecord& record, const Embedder& e,
                                    const SourceSet& sources) {
  Representation rep;
  rep.dataset_id = record.id();
  rep.mask = sources;
  rep.metadata_vec = e.embed_metadata(record.metadata);
  rep.concat = rep.metadata_vec;
  for (auto tag : sources.ordered()) {
    const auto* sp = record.find(tag);
    if (sp == nullptr) {
      throw LookupError("dataset '" + record.id() + "' has no pipeline from source " +
                        std::string(1, to_char(tag)));
    }
    auto v = e.embed_pipeline(sp->pipeline, {record.id(), tag});
    rep.concat.values.insert(rep.concat.values.end(), v.values.begin(), v.values.end());
    rep.pipeline_vecs.emplace_back(tag, std::move(v));
  }
  return rep;
}

bool is_eligible_donor(const CorpusRecord& r, const SourceSet& sources) {
  if (!r.is_donor()) return false;
  for (auto tag : sources.ordered()) {
    if (r.find(tag) == nullptr) return false;
  }
  return true;
}

std::string recommendation_to_json(const TransferRecommendation& r, bool include_timing) {
  detail::ordered_json j = detail::ordered_json::object();
  j["query_id"] = r.query_id;
  j["donor_id"] = r.donor_id;
  j["pipeline"] = detail::pipeline_to_json(r.pipeline);
  j["distance"] = r.distance;
  j["elapsed_ms"] = include_timing ? r.elapsed_ms : 0;
  return detail::dump(j);
}

DonorIndex::DonorIndex(const Corpus& corpus, const Embedder& e, SourceSet sources)
    : corpus_(&corpus), sources_(sources) {
  candidates_.reserve(corpus.size());
  for (const auto& r : corpus.records()) {
    if (!is_eligible_donor(r, sources_)) continue;
    candidates_.push_back({r.id(), build_representation(r, e, sources_).concat});
  }
}

const Pipeline& DonorIndex::human_pipeline(std::string_view donor_id) const {
  return corpus_->at(donor_id).find(SourceTag::H)->pipeline;
}

Nearest DonorIndex::nearest(const EmbeddingVector& query,
                            std::optional<std::string_view> exclude) const {
  if (candidates_.empty()) {
    throw LookupError("corpus has no donor with a human pipeline" +
                      (sources_.empty() ? std::string() : " and sources " + sources_.to_string()));
  }
  try {
    return nearest_dataset(query, candidates_, exclude);
  } catch (const LookupError&) {
    throw LookupError("no eligible donor besides the query itself");
  }
}

namespace {

std::int64_t elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               start)
      .count();
}

}  // namespace

TransferRecommendation recommend_direct(const CorpusRecord& query, const DonorIndex& index,
                                        const Embedder& e) {
  const auto start = std::chrono::steady_clock::now();
  const auto rep = build_representation(query, e, index.sources());
  const auto nearest = index.nearest(rep.concat, query.id());
  TransferRecommendation rec{query.id(), nearest.id, index.human_pipeline(nearest.id),
                             nearest.distance, 0};
  rec.elapsed_ms = elapsed_since(start);
  return rec;
}

TransferRecommendation recommend_direct(const CorpusRecord& query, const Corpus& corpus,
                                        const Embedder& e, const SourceSet& sources) {
  const auto start = std::chrono::steady_clock::now();
  const DonorIndex index(corpus, e, sources);
  auto rec = recommend_direct(query, index, e);
  rec.elapsed_ms = elapsed_since(start);
  pilot::detail::logger().info("direct transfer {} -> {} (distance {}, {} ms)", rec.query_id,
                               rec.donor_id, rec.distance, rec.elapsed_ms);
  return rec;
}

EvaluationRecord evaluate_or_fail(const Pipeline& p, const TabularDataset& data,
                                  const CorpusRecord& query, std::optional<PipelineOrigin> origin,
                                  const Protocol& protocol, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  EvaluationRecord rec;
  try {
    rec = engine::evaluate(p, data, query.task, protocol, seed);
  } catch (const StageError& err) {
    rec.metric = query.task.metric;
    rec.score = std::numeric_limits<double>::quiet_NaN();
    rec.failure = err.what();
    rec.pipeline = p;
    rec.wall_time_ms = elapsed_since(start);
    pilot::detail::logger().warn("evaluation of '{}' failed: {}", query.id(), err.what());
  }
  rec.dataset_id = query.id();
  rec.pipeline_origin = std::move(origin);
  return rec;
}

EvaluationRecord transfer_and_evaluate(const CorpusRecord& query, const TabularDataset& data,
                                       const Corpus& corpus, const Embedder& e,
                                       const SourceSet& sources, const Protocol& protocol,
                                       std::uint64_t seed) {
  const auto rec = recommend_direct(query, corpus, e, sources);
  return evaluate_or_fail(rec.pipeline, data, query, PipelineOrigin{rec.donor_id, SourceTag::H},
                          protocol, seed);
}

}  // namespace pilot::transfer
