#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "generators.hpp"
#include "pilot/embed.hpp"
#include "pilot/error.hpp"
#include "pilot/random.hpp"
#include "test_util.hpp"

using namespace pilot;

namespace {

// Second implementation of the hashed n-gram embedder, written from its
// documented contract only.
std::uint64_t oracle_fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> oracle_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    const bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
    if (word) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> oracle_embed(const std::string& text, std::size_t dim) {
  std::vector<std::string> features;
  const auto toks = oracle_tokens(text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    features.push_back("w:" + toks[i]);
    if (i + 1 < toks.size()) features.push_back("b:" + toks[i] + " " + toks[i + 1]);
    const auto padded = "^" + toks[i] + "$";
    for (std::size_t k = 0; k + 3 <= padded.size(); ++k) features.push_back("c:" + padded.substr(k, 3));
  }
  std::vector<double> v(dim, 0.0);
  std::vector<double> unsigned_counts(dim, 0.0);
  for (const auto& f : features) {
    const auto h = oracle_fnv(f);
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
    unsigned_counts[h % dim] += 1.0;
  }
  bool all_zero = true;
  for (double x : v) all_zero = all_zero && x == 0.0;
  if (all_zero) v = unsigned_counts;
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (ss > 0.0) {
    for (double& x : v) x /= std::sqrt(ss);
  }
  return v;
}

double oracle_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

const HashedNGramEmbedder kEmbedder;

}  // namespace

TEST_CASE("FNV-1a constants") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Titanic: Passenger-Survival, 1912!") ==
        std::vector<std::string>{"titanic", "passenger", "survival", "1912"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("naïve café") == std::vector<std::string>{"naïve", "café"});
}

TEST_CASE("empty text embeds to the zero vector") {
  const auto v = kEmbedder.embed_text("");
  CHECK(v.dim() == 512);
  CHECK(v.is_zero());
  CHECK(kEmbedder.embed_text(" ,;- ").is_zero());
}

TEST_CASE("embedding is deterministic") {
  CHECK(kEmbedder.embed_text("credit card default") == kEmbedder.embed_text("credit card default"));
  CHECK(HashedNGramEmbedder(64).embed_text("x y") == HashedNGramEmbedder(64).embed_text("x y"));
}

TEST_CASE("related titles are closer than unrelated ones") {
  const auto a = kEmbedder.embed_text("titanic passenger survival");
  const auto b = kEmbedder.embed_text("survival of titanic passengers");
  const auto c = kEmbedder.embed_text("credit card default risk");
  CHECK(cosine(a, b) > cosine(a, c));
}

TEST_CASE("built-in embedder matches an independent implementation") {
  Rng rng(2);
  for (std::size_t dim : {7u, 64u, 512u, 1000u}) {
    const HashedNGramEmbedder e(dim);
    for (int i = 0; i < 40; ++i) {
      const auto text = test::random_text(rng, 15);
      check_close(e.embed_text(text).values, oracle_embed(text, dim), 1e-15);
    }
  }
}

TEST_CASE("nonempty texts embed to unit norm") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    auto text = test::random_text(rng, 10);
    if (tokenize(text).empty()) text = "x";
    const HashedNGramEmbedder e(1 + rng.below(600));
    CHECK(std::abs(l2_norm(e.embed_text(text)) - 1.0) < 1e-9);
  }
  // Tiny dims make exact cancellation of signed counts likely; norm still holds.
  for (int i = 0; i < 200; ++i) {
    CHECK(std::abs(l2_norm(HashedNGramEmbedder(1).embed_text(test::random_text(rng, 6) + " z")) - 1.0) < 1e-9);
  }
}

TEST_CASE("texts with equal n-gram multisets embed identically") {
  CHECK(kEmbedder.embed_text("red blue red green red") == kEmbedder.embed_text("red green red blue red"));
  CHECK(kEmbedder.embed_text("a b a c a") == kEmbedder.embed_text("a c a b a"));
  CHECK_FALSE(kEmbedder.embed_text("a b c") == kEmbedder.embed_text("c b a"));
}

TEST_CASE("metadata embedding is the embedding of the metadata document") {
  CHECK(embed_metadata(DatasetMetadata{}, kEmbedder).is_zero());
  DatasetMetadata a{"a", "Titanic", "Sub", "Passengers", {"ships"}, std::nullopt};
  DatasetMetadata b = a;
  b.id = "b";
  b.data_path = "elsewhere.csv";
  CHECK(embed_metadata(a, kEmbedder) == embed_metadata(b, kEmbedder));
  CHECK(embed_metadata(a, kEmbedder) == kEmbedder.embed_text("Titanic Sub Passengers ships"));
}

TEST_CASE("pairwise metadata distances match a recomputation") {
  const std::vector<DatasetMetadata> ms = {
      {"t", "Titanic survival", "", "Passenger records from 1912", {"ships", "history"}, std::nullopt},
      {"h", "House prices", "Ames Iowa", "Sale prices of residential homes", {"housing"}, std::nullopt},
      {"c", "Credit default", "", "Taiwan credit card clients", {"finance", "risk"}, std::nullopt}};
  for (const auto& a : ms) {
    for (const auto& b : ms) {
      const auto expected = oracle_distance(oracle_embed(metadata_document(a), 512),
                                            oracle_embed(metadata_document(b), 512));
      CHECK(std::abs(distance(embed_metadata(a, kEmbedder), embed_metadata(b, kEmbedder)) - expected) < 1e-12);
    }
  }
}

TEST_CASE("one-stage pipeline embeds as its single stage text") {
  const Pipeline p({{StageKind::estimator, "logistic_regression", {}}});
  const auto text = canonical_text(p);
  CHECK(embed_pipeline(p, kEmbedder) == kEmbedder.embed_text(text[0]));
}

TEST_CASE("two identical stage texts embed like one") {
  const Pipeline p({{StageKind::preprocessor, "standard_scaler", {}},
                    {StageKind::estimator, "knn_classifier", {}}});
  for (const auto& text : canonical_text(p)) {
    const std::vector<std::string> once = {text};
    const std::vector<std::string> twice = {text, text};
    CHECK(kEmbedder.embed_stage_texts(twice) == kEmbedder.embed_stage_texts(once));
    CHECK(kEmbedder.embed_stage_texts(once) == kEmbedder.embed_text(text));
  }
  // In a full pipeline a repeated stage only shifts the mean toward that stage.
  const Pipeline repeated({{StageKind::preprocessor, "standard_scaler", {}},
                           {StageKind::preprocessor, "standard_scaler", {}},
                           {StageKind::estimator, "knn_classifier", {}}});
  CHECK(cosine(embed_pipeline(repeated, kEmbedder), embed_pipeline(p, kEmbedder)) > 0.9);
}

TEST_CASE("three-stage pipeline embedding is the renormalized mean") {
  const Pipeline p({{StageKind::preprocessor, "mean_imputer", {}},
                    {StageKind::feature_selector, "select_k_best", {{"k", std::int64_t{4}}}},
                    {StageKind::estimator, "gaussian_naive_bayes", {}}});
  std::vector<double> mean(512, 0.0);
  for (const auto& t : canonical_text(p)) {
    const auto v = oracle_embed(t, 512);
    for (std::size_t i = 0; i < 512; ++i) mean[i] += v[i] / 3.0;
  }
  double ss = 0.0;
  for (double x : mean) ss += x * x;
  for (double& x : mean) x /= std::sqrt(ss);
  const auto got = embed_pipeline(p, kEmbedder);
  check_close(got.values, mean, 1e-12);
  CHECK(std::abs(l2_norm(got) - 1.0) < 1e-12);
}

TEST_CASE("distance basics") {
  const auto v = kEmbedder.embed_text("abc def");
  CHECK(distance(v, v) == 0.0);
  EmbeddingVector e1(std::vector<double>{1, 0, 0});
  EmbeddingVector e2(std::vector<double>{0, 1, 0});
  CHECK(std::abs(distance(e1, e2) - std::sqrt(2.0)) < 1e-15);
  CHECK_THROWS_AS(distance(e1, EmbeddingVector::zeros(4)), DimensionError);
  CHECK(cosine(e1, EmbeddingVector::zeros(3)) == 0.0);
}

TEST_CASE("distance matches a brute-force sum of squares") {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const std::size_t dim = 1 + rng.below(700);
    std::vector<double> a(dim);
    std::vector<double> b(dim);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    long double s = 0.0L;
    for (std::size_t k = 0; k < dim; ++k) s += static_cast<long double>(a[k] - b[k]) * (a[k] - b[k]);
    CHECK(std::abs(distance(EmbeddingVector(a), EmbeddingVector(b)) - static_cast<double>(std::sqrt(s))) < 1e-12);
  }
}

TEST_CASE("distance is a metric on embeddings") {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const auto a = kEmbedder.embed_text(test::random_text(rng, 6));
    const auto b = kEmbedder.embed_text(test::random_text(rng, 6));
    const auto c = kEmbedder.embed_text(test::random_text(rng, 6));
    CHECK(distance(a, b) >= 0.0);
    CHECK(distance(a, b) == distance(b, a));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST_CASE("lookup keys") {
  CHECK(metadata_key("titanic") == "meta:titanic");
  CHECK(pipeline_key("titanic", SourceTag::G) == "pipe:titanic:G");
}

TEST_CASE("external store rejects misses, duplicates and wrong dims") {
  ExternalVectorStore store(3);
  store.insert("meta:a", EmbeddingVector(std::vector<double>{1, 0, 0}));
  CHECK_THROWS_AS(store.insert("meta:a", EmbeddingVector(std::vector<double>{0, 1, 0})), ConflictError);
  CHECK_THROWS_AS(store.insert("meta:b", EmbeddingVector(std::vector<double>{0, 1})), DimensionError);
  CHECK_THROWS_AS(store.lookup("meta:zzz"), LookupError);
  DatasetMetadata m;
  m.id = "a";
  CHECK(embed_metadata(m, store).values == std::vector<double>{1, 0, 0});
  m.id = "b";
  CHECK_THROWS_AS(embed_metadata(m, store), LookupError);
  const Pipeline p({{StageKind::estimator, "decision_tree", {}}});
  CHECK_THROWS_AS(embed_pipeline(p, store, {"a", SourceTag::H}), LookupError);
  store.insert("pipe:a:H", EmbeddingVector(std::vector<double>{0, 0, 1}));
  CHECK(embed_pipeline(p, store, {"a", SourceTag::H}).values == std::vector<double>{0, 0, 1});
}

TEST_CASE("vector files round-trip bit-exactly") {
  Rng rng(13);
  ExternalVectorStore store(16);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(16);
    for (auto& x : v) x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(30)) - 15.0);
    store.insert("meta:" + std::to_string(i), EmbeddingVector(v));
  }
  test::TempDir dir;
  save_vectors(store, dir / "v.jsonl");
  const auto back = load_vectors(dir / "v.jsonl");
  CHECK(back.size() == 50);
  CHECK(back.dim() == 16);
  CHECK(back.entries() == store.entries());
}

TEST_CASE("empty vector file gives an empty store with the declared dim") {
  test::TempDir dir;
  test::write_text(dir / "v.jsonl", "");
  const auto s = load_vectors(dir / "v.jsonl", 384);
  CHECK(s.size() == 0);
  CHECK(s.dim() == 384);
}

TEST_CASE("mixed-dim vector files name the first offending entry") {
  const std::string text =
      "{\"key\":\"meta:a\",\"dim\":2,\"values\":[1.0,0.0]}\n"
      "{\"key\":\"meta:b\",\"dim\":2,\"values\":[0.0,1.0]}\n"
      "{\"key\":\"meta:c\",\"dim\":3,\"values\":[0.0,0.0,1.0]}\n"
      "{\"key\":\"meta:d\",\"dim\":4,\"values\":[0.0,0.0,0.0,1.0]}\n";
  try {
    parse_vectors(text);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("meta:c") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_vectors("{\"key\":\"k\",\"dim\":2,\"values\":[1.0]}\n"), ParseError);
  CHECK_THROWS_AS(parse_vectors("{\"key\":\"k\",\"dim\":2,\"values\":[1.0,\"x\"]}\n"), ParseError);
  CHECK_THROWS_AS(parse_vectors("not json\n"), ParseError);
  CHECK_THROWS_AS(parse_vectors("{\"key\":\"k\",\"dim\":1,\"values\":[1.0]}\n"
                                "{\"key\":\"k\",\"dim\":1,\"values\":[2.0]}\n"),
                  ConflictError);
}
