#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "generators.hpp"
#include "linear_task.hpp"
#include "pilot/engine.hpp"
#include "pilot/error.hpp"
#include "pilot/metricnet.hpp"
#include "pilot/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace pilot;
using namespace pilot::metricnet;

namespace {

MetricNetwork random_net(std::vector<std::size_t> dims, Rng& rng) {
  MetricNetwork net(std::move(dims));
  for (auto& p : net.parameters()) p = rng.uniform(-0.8, 0.8);
  return net;
}

std::vector<TrainingPair> random_batch(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<TrainingPair> b(n);
  for (auto& p : b) {
    p.input.resize(dim);
    for (auto& x : p.input) x = rng.uniform(-1.0, 1.0);
    p.target = rng.uniform(0.0, 2.0);
  }
  return b;
}

TrainConfig small_config(std::uint64_t seed = 0) {
  TrainConfig c;
  c.seed = seed;
  c.hidden = {16, 8, 4};
  c.epochs = 200;
  return c;
}

CorpusRecord record(std::string id, std::string title, Pipeline h) {
  CorpusRecord r;
  r.metadata.id = std::move(id);
  r.metadata.title = std::move(title);
  r.task = TaskSpec::classification("label");
  r.pipelines.push_back({std::move(h), SourceTag::H, std::nullopt});
  return r;
}

Pipeline single(std::string name, ParamMap params = {}) {
  return Pipeline({{StageKind::estimator, std::move(name), std::move(params)}});
}

}  // namespace

TEST_CASE("init is deterministic with the configured shapes") {
  TrainConfig c;
  const auto a = MetricNetwork::init(40, c);
  const auto b = MetricNetwork::init(40, c);
  CHECK(a == b);
  CHECK(a.layer_dims() == std::vector<std::size_t>{40, 256, 128, 64, 1});
  CHECK(a.layer_count() == 4);
  CHECK(a.weights(0).size() == 40 * 256);
  CHECK(a.biases(3).size() == 1);
  CHECK(a.parameters().size() == 40 * 256 + 256 + 256 * 128 + 128 + 128 * 64 + 64 + 64 + 1);
  for (std::size_t l = 0; l < 4; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(a.layer_dims()[l]));
    for (double w : a.weights(l)) CHECK(std::abs(w) <= bound);
    for (double b0 : a.biases(l)) CHECK(b0 == 0.0);
  }
  c.seed = 1;
  CHECK_FALSE(MetricNetwork::init(40, c) == a);
}

TEST_CASE("initial outputs on unit-scale inputs stay in (0, 10)") {
  const auto net = MetricNetwork::init(64, TrainConfig{});
  Rng rng(9);
  std::vector<double> x(64);
  for (int s = 0; s < 1000; ++s) {
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const double y = net.forward(x);
    CHECK(y > 0.0);
    CHECK(y < 10.0);
  }
}

TEST_CASE("forward closed forms") {
  MetricNetwork zero({5, 4, 3, 2, 1});
  const std::vector<double> x = {0.3, -1.0, 2.0, 0.0, 5.0};
  CHECK(zero.forward(x) == Catch::Approx(std::log(2.0)).epsilon(1e-15));

  Rng rng(2);
  auto net = random_net({5, 4, 3, 2, 1}, rng);
  for (auto& w : net.weights(3)) w = 0.0;
  net.biases(3)[0] = -1.25;
  for (int s = 0; s < 10; ++s) {
    std::vector<double> in(5);
    for (auto& v : in) v = rng.normal();
    CHECK(net.forward(in) == softplus(-1.25));
  }
  CHECK(softplus(-1.25) == Catch::Approx(std::log1p(std::exp(-1.25))).epsilon(1e-15));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) >= 0.0);
  CHECK_THROWS_AS(net.forward(std::vector<double>(4)), DimensionError);
  CHECK_THROWS_AS(MetricNetwork({3, 2}), ValidationError);
}

TEST_CASE("forward matches a straightforward re-implementation") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const std::vector<std::size_t> dims = {7, 6, 5, 4, 1};
    const auto net = random_net(dims, rng);
    std::vector<double> x(7);
    for (auto& v : x) v = rng.normal();
    const double expected = test::reference_forward<double>(dims, net.parameters(), x);
    CHECK(std::abs(net.forward(x) - expected) <= 1e-12);
    CHECK(net.forward(x) >= 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const std::vector<std::size_t> dims = {6, 5, 4, 3, 1};
    const auto net = random_net(dims, rng);
    const auto batch = random_batch(4, 6, rng);
    CHECK(gradients(net, batch).loss == Catch::Approx(mean_squared_error(net, batch)).epsilon(1e-14));
    CHECK(test::max_gradient_error(net, batch) < 1e-6);
  }
}

TEST_CASE("gradient vanishes at exact targets and ignores duplication") {
  Rng rng(5);
  const auto net = random_net({4, 3, 3, 2, 1}, rng);
  auto batch = random_batch(6, 4, rng);
  const auto g = gradients(net, batch);

  auto doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const auto g2 = gradients(net, doubled);
  for (std::size_t i = 0; i < g.values.size(); ++i) CHECK(g2.values[i] == Catch::Approx(g.values[i]).epsilon(1e-12).margin(1e-15));

  for (auto& p : batch) p.target = net.forward(p.input);
  for (double v : gradients(net, batch).values) CHECK(v == 0.0);
  CHECK_THROWS_AS(gradients(net, std::vector<TrainingPair>{}), ValidationError);
}

TEST_CASE("adam update matches hand-computed values") {
  const TrainConfig c;
  std::vector<double> p = {1.0};
  std::vector<double> m = {0.0};
  std::vector<double> v = {0.0};
  adam_update(p, std::vector<double>{0.5}, m, v, 1, c);
  CHECK(std::abs((p[0] - 1.0) - (-0.001 * 0.5 / (0.5 + 1e-8))) <= 1e-12);
  CHECK(std::abs(p[0] - 0.99900000002) <= 1e-12);
  adam_update(p, std::vector<double>{-0.3}, m, v, 2, c);
  CHECK(std::abs(p[0] - 0.99880850198941775) <= 1e-12);

  MetricNetwork net({1, 1});
  net.weights(0)[0] = 1.0;
  AdamState state;
  adam_step(net, Gradients{{0.5, 0.0}, 0.0}, state, c);
  adam_step(net, Gradients{{-0.3, 0.0}, 0.0}, state, c);
  CHECK(state.step == 2);
  CHECK(std::abs(net.weights(0)[0] - 0.99880850198941775) <= 1e-12);
  CHECK(net.biases(0)[0] == 0.0);
}

TEST_CASE("zero gradients leave parameters unchanged") {
  Rng rng(6);
  auto net = random_net({3, 4, 1}, rng);
  const auto before = net;
  AdamState state;
  const Gradients zero{std::vector<double>(net.parameters().size(), 0.0), 0.0};
  for (int i = 0; i < 50; ++i) adam_step(net, zero, state, TrainConfig{});
  CHECK(net == before);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.adam_beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.hidden = {8, 0};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(parse_target_mode("performance") == TargetMode::performance);
  CHECK(to_string(TargetMode::pipeline_distance) == "pipeline_distance");
  CHECK_THROWS_AS(parse_target_mode("nope"), ValidationError);
  auto epochs0 = small_config();
  epochs0.epochs = 0;
  CHECK_THROWS_AS(train_on_pairs(test::linear_task(8, 3, 0), epochs0), ValidationError);
}

TEST_CASE("training pairs") {
  const HashedNGramEmbedder e(32);
  const Corpus two({record("a", "alpha", single("decision_tree")), record("b", "beta", single("decision_tree"))});
  const auto pairs = make_training_pairs(two, e, {}, std::nullopt);
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) {
    CHECK(p.input.size() == 64);
    CHECK(p.target == 0.0);
  }
  CHECK_THROWS_AS(make_training_pairs(two, e, {}, std::string_view("a")), ValidationError);

  std::vector<CorpusRecord> five;
  const std::vector<Pipeline> hs = {single("decision_tree"), single("knn_classifier"),
                                    single("gaussian_naive_bayes"),
                                    single("decision_tree", {{"max_depth", std::int64_t{3}}}),
                                    single("logistic_regression")};
  for (int i = 0; i < 5; ++i) five.push_back(record("d" + std::to_string(i), "ds " + std::to_string(i), hs[i]));
  const Corpus c(five);
  const auto ps = make_training_pairs(c, e, {}, std::nullopt);
  REQUIRE(ps.size() == 20);

  // Offline targets: explicit sum of squared differences over pipeline embeddings.
  std::set<double> expected;
  std::set<double> got;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      const auto a = embed_pipeline(hs[i], e).values;
      const auto b = embed_pipeline(hs[j], e).values;
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      expected.insert(std::sqrt(s));
    }
  }
  for (const auto& p : ps) got.insert(p.target);
  REQUIRE(got.size() == expected.size());
  for (auto gi = got.begin(), ei = expected.begin(); gi != got.end(); ++gi, ++ei) CHECK(std::abs(*gi - *ei) <= 1e-12);

  // Each ordered pair appears reversed with an equal target.
  for (const auto& p : ps) {
    std::vector<double> rev(p.input.begin() + 32, p.input.end());
    rev.insert(rev.end(), p.input.begin(), p.input.begin() + 32);
    const auto it = std::find_if(ps.begin(), ps.end(), [&](const TrainingPair& q) { return q.input == rev; });
    REQUIRE(it != ps.end());
    CHECK(it->target == p.target);
  }
}

TEST_CASE("performance targets come from evaluating donor pipelines") {
  test::TempDir dir;
  const auto cc = synthetic::clustered_corpus({2, 2, 80, 3});
  const auto corpus = load_corpus(synthetic::write_clustered(cc, dir.path()));
  const auto perf = performance_from_data(corpus, Protocol::kfold(3), 0);
  const auto pairs = make_training_pairs(corpus, HashedNGramEmbedder(16), {}, std::nullopt,
                                         TargetMode::performance, perf);
  REQUIRE(pairs.size() == 12);
  const auto& q = corpus.records()[0];
  const auto& d = corpus.records()[2];
  const auto ev = engine::evaluate(d.find(SourceTag::H)->pipeline, cc.data.at(q.id()), q.task, Protocol::kfold(3), 0);
  CHECK(perf(q, d) == Catch::Approx(1.0 - ev.score).epsilon(1e-12));
  for (const auto& p : pairs) {
    CHECK(p.target >= 0.0);
    CHECK(p.target <= 1.0);
  }
  CHECK_THROWS_AS(make_training_pairs(corpus, HashedNGramEmbedder(16), {}, std::nullopt, TargetMode::performance),
                  ValidationError);
}

TEST_CASE("training fits an affine target and is deterministic") {
  const auto pairs = test::linear_task(128, 8, 1);
  auto c = small_config(1);
  const auto a = train_on_pairs(pairs, c);
  CHECK(a.final_loss < 0.1 * a.initial_loss);
  CHECK(a.final_loss == Catch::Approx(mean_squared_error(a.net, pairs)).epsilon(1e-12));
  const auto b = train_on_pairs(pairs, c);
  CHECK(a.net == b.net);
  CHECK(a.final_loss == b.final_loss);
  c.seed = 2;
  CHECK_FALSE(train_on_pairs(pairs, c).net == a.net);
}

TEST_CASE("learned recommendation basics") {
  const HashedNGramEmbedder e(16);
  const Corpus one({record("only", "alpha", single("decision_tree"))});
  MetricNetwork net({32, 4, 1});
  const auto q = record("q", "beta", single("knn_classifier"));
  CHECK(recommend_learned(q, one, net, e, {}).donor_id == "only");

  const Corpus many({record("m", "alpha", single("decision_tree")), record("c", "beta", single("knn_classifier")),
                     record("x", "gamma", single("logistic_regression"))});
  Rng rng(7);
  auto constant = random_net({32, 4, 3, 2, 1}, rng);
  for (auto& w : constant.weights(3)) w = 0.0;
  const auto rec = recommend_learned(q, many, constant, e, {});
  CHECK(rec.donor_id == "c");
  CHECK(rec.distance == softplus(constant.biases(3)[0]));
  CHECK(rec.pipeline == single("knn_classifier"));
  CHECK(recommend_learned(many.at("c"), many, constant, e, {}).donor_id == "m");

  CHECK_THROWS_AS(recommend_learned(q, many, MetricNetwork({30, 1}), e, {}), DimensionError);
  CHECK_THROWS_AS(recommend_learned(q, Corpus{}, net, e, {}), LookupError);
}

TEST_CASE("learned metric stays close to direct transfer on clustered data") {
  const auto cc = synthetic::clustered_corpus({3, 6, 40, 0});
  const HashedNGramEmbedder e(64);
  TrainConfig c;
  c.hidden = {32, 16, 8};
  c.epochs = 60;
  int learned_hits = 0;
  int direct_hits = 0;
  int queries = 0;
  for (std::size_t i = 0; i < cc.corpus.size(); i += 3) {
    const auto& q = cc.corpus.records()[i];
    const auto trained = train(cc.corpus, e, {}, q.id(), c);
    const auto learned = recommend_learned(q, cc.corpus, trained.net, e, {});
    const auto direct = transfer::recommend_direct(q, cc.corpus, e);
    learned_hits += cc.cluster.at(learned.donor_id) == cc.cluster.at(q.id());
    direct_hits += cc.cluster.at(direct.donor_id) == cc.cluster.at(q.id());
    ++queries;
  }
  CHECK(static_cast<double>(learned_hits) / queries >= static_cast<double>(direct_hits) / queries - 0.10);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  test::TempDir dir;
  Rng rng(8);
  Checkpoint ck{random_net({6, 5, 4, 3, 1}, rng), small_config(42), SourceSet::parse("H,G"), "hashed-ngram", 3};
  ck.net.parameters()[0] = 0.1 + 0.2;
  ck.net.parameters()[1] = -1e-300;
  ck.net.parameters()[2] = 5e-324;
  ck.config.target_mode = TargetMode::performance;
  save_checkpoint(ck, dir / "net.json");
  const auto back = load_checkpoint(dir / "net.json");
  CHECK(back == ck);
  for (std::size_t i = 0; i < ck.net.parameters().size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(back.net.parameters()[i]) == std::bit_cast<std::uint64_t>(ck.net.parameters()[i]));
  }
  CHECK(checkpoint_from_json(checkpoint_to_json(ck)) == ck);
  CHECK_THROWS_AS(checkpoint_from_json("{\"format\":\"other\"}"), ValidationError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), IoError);
}
