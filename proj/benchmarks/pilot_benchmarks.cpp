#include <benchmark/benchmark.h>

#include <vector>

#include "pilot/embed.hpp"
#include "pilot/engine.hpp"
#include "pilot/metricnet.hpp"
#include "pilot/random.hpp"
#include "pilot/synthetic.hpp"
#include "pilot/transfer.hpp"

namespace {

using namespace pilot;

void BM_EmbedMetadata(benchmark::State& state) {
  const HashedNGramEmbedder e(static_cast<std::size_t>(state.range(0)));
  const auto corpus = synthetic::random_corpus(64, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed_metadata(corpus.records()[i++ % corpus.size()].metadata, e));
  }
}
BENCHMARK(BM_EmbedMetadata)->Arg(64)->Arg(512);

void BM_NearestScan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<transfer::Candidate> cs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(512);
    for (auto& x : v) x = rng.normal();
    cs.push_back({"d" + std::to_string(i), EmbeddingVector(std::move(v))});
  }
  const auto query = cs.front().vector;
  for (auto _ : state) benchmark::DoNotOptimize(transfer::nearest_dataset(query, cs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_NearestScan)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RecommendDirect(benchmark::State& state) {
  const auto corpus = synthetic::random_corpus(static_cast<std::size_t>(state.range(0)), 3);
  const HashedNGramEmbedder e;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transfer::recommend_direct(corpus.records().front(), corpus, e));
  }
}
BENCHMARK(BM_RecommendDirect)->Arg(1000)->Unit(benchmark::kMillisecond);

std::vector<metricnet::TrainingPair> random_pairs(std::size_t n, std::size_t dim) {
  Rng rng(4);
  std::vector<metricnet::TrainingPair> pairs(n);
  for (auto& p : pairs) {
    p.input.resize(dim);
    for (auto& x : p.input) x = rng.uniform(-1.0, 1.0);
    p.target = rng.uniform(0.0, 2.0);
  }
  return pairs;
}

void BM_MetricForward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto net = metricnet::MetricNetwork::init(dim, metricnet::TrainConfig{});
  const auto pairs = random_pairs(1, dim);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(pairs[0].input));
}
BENCHMARK(BM_MetricForward)->Arg(64)->Arg(1024);

void BM_MetricGradients(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto net = metricnet::MetricNetwork::init(dim, metricnet::TrainConfig{});
  const auto batch = random_pairs(16, dim);
  for (auto _ : state) benchmark::DoNotOptimize(metricnet::gradients(net, batch));
}
BENCHMARK(BM_MetricGradients)->Arg(64)->Arg(1024);

void BM_Evaluate(benchmark::State& state) {
  const auto data = synthetic::label_consistent(static_cast<std::size_t>(state.range(0)), 4, 2, 3, 5);
  const Pipeline p({{StageKind::preprocessor, "one_hot_encoder", {}},
                    {StageKind::preprocessor, "standard_scaler", {}},
                    {StageKind::estimator, "logistic_regression", {}}});
  const auto task = TaskSpec::classification("label");
  for (auto _ : state) benchmark::DoNotOptimize(engine::evaluate(p, data, task, Protocol::kfold(5), 0));
}
BENCHMARK(BM_Evaluate)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
