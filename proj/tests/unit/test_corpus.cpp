#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <json.hpp>

#include "generators.hpp"
#include "pilot/corpus.hpp"
#include "pilot/error.hpp"
#include "test_util.hpp"

using namespace pilot;

namespace {

Pipeline two_stage() {
  return Pipeline({{StageKind::preprocessor, "standard_scaler", {}},
                   {StageKind::estimator, "knn_classifier", {{"k", std::int64_t{3}}}}});
}

CorpusRecord simple_record(std::string id) {
  CorpusRecord r;
  r.metadata = {id, "Titanic", "Who survived", "Passenger manifest", {"ships", "history"},
                "data/" + id + ".csv"};
  r.task = TaskSpec::classification("Survived");
  r.pipelines.push_back({two_stage(), SourceTag::H, 0.81});
  return r;
}

EvaluationRecord evaluation(std::string id, const Pipeline& p, double score) {
  EvaluationRecord e;
  e.dataset_id = std::move(id);
  e.score = score;
  e.pipeline = p;
  return e;
}

}  // namespace

TEST_CASE("empty corpus file loads as an empty corpus") {
  test::TempDir dir;
  test::write_text(dir / "empty.jsonl", "");
  CHECK(load_corpus(dir / "empty.jsonl").empty());
  CHECK(parse_corpus("\n  \n").empty());
}

TEST_CASE("one-record corpus round-trips bit-identically") {
  test::TempDir dir;
  const auto line = record_to_json(simple_record("titanic")) + "\n";
  test::write_text(dir / "in.jsonl", line);
  const auto c = load_corpus(dir / "in.jsonl");
  REQUIRE(c.size() == 1);
  save_corpus(c, dir / "out.jsonl");
  CHECK(test::read_text(dir / "out.jsonl") == line);
}

TEST_CASE("duplicate ids are rejected citing both lines") {
  try {
    load_corpus(test::fixture("dup_ids.jsonl"));
    FAIL("expected ConflictError");
  } catch (const ConflictError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'dup'") != std::string::npos);
    CHECK(msg.find("lines 3 and 7") != std::string::npos);
  }
}

TEST_CASE("malformed lines name their line number") {
  const auto good = record_to_json(simple_record("a"));
  try {
    parse_corpus(good + "\n" + good.substr(0, good.size() / 2) + "\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == std::optional<std::size_t>(2));
  }
  // Structurally valid JSON that violates the schema is still reported with its line.
  try {
    parse_corpus("\n{\"id\": \"x\"}\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == std::optional<std::size_t>(2));
  }
}

TEST_CASE("saving an empty corpus writes an empty file") {
  test::TempDir dir;
  save_corpus(Corpus{}, dir / "c.jsonl");
  CHECK(test::read_text(dir / "c.jsonl").empty());
}

TEST_CASE("random corpora round-trip field for field") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<CorpusRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(test::random_record(rng, "ds" + std::to_string(i)));
    const Corpus c(records);
    test::TempDir dir;
    save_corpus(c, dir / "c.jsonl");
    const auto back = load_corpus(dir / "c.jsonl");
    REQUIRE(back.size() == 10);
    CHECK(back == c);
    CHECK(corpus_to_jsonl(back) == corpus_to_jsonl(c));
  }
}

TEST_CASE("unicode descriptions survive a round trip") {
  auto r = simple_record("uni");
  r.metadata.description = "Données météo — 東京 ☂ naïve café é́";
  r.metadata.keywords = {"日本語", "emoji 🙂"};
  const Corpus c({r});
  const auto back = parse_corpus(corpus_to_jsonl(c));
  CHECK(back == c);
  CHECK(back.at("uni").metadata.description == r.metadata.description);
}

TEST_CASE("ids are unique within a corpus") {
  CHECK_THROWS_AS(Corpus({simple_record("a"), simple_record("a")}), ConflictError);
  Rng rng(3);
  std::vector<CorpusRecord> rs;
  for (int i = 0; i < 30; ++i) rs.push_back(test::random_record(rng, "id" + std::to_string(i)));
  const Corpus c(rs);
  std::set<std::string> ids;
  for (const auto& r : c.records()) ids.insert(r.id());
  CHECK(ids.size() == c.size());
}

TEST_CASE("records reject two pipelines from one source") {
  auto r = simple_record("x");
  r.pipelines.push_back({two_stage(), SourceTag::H, std::nullopt});
  CHECK_THROWS_AS(r.validate(), ValidationError);
  CHECK_THROWS_AS(record_from_json(record_to_json(r)), ValidationError);
}

TEST_CASE("metadata_document joins fields in order with single spaces") {
  DatasetMetadata m{"id", "Title", "", "Some description", {"k1", "k2"}, std::nullopt};
  CHECK(metadata_document(m) == "Title Some description k1 k2");
  m.subtitle = "Sub";
  CHECK(metadata_document(m) == "Title Sub Some description k1 k2");
  CHECK(metadata_document(DatasetMetadata{}).empty());
  // A pure function: equal records give equal text, and the id is not part of it.
  auto other = m;
  other.id = "different";
  CHECK(metadata_document(other) == metadata_document(m));
}

TEST_CASE("source sets iterate in canonical order") {
  const auto s = SourceSet::parse("G,O,H");
  CHECK(s.to_string() == "H,O,G");
  CHECK(s.size() == 3);
  CHECK(SourceSet::parse("").empty());
  CHECK_THROWS_AS(SourceSet::parse("H,X"), ValidationError);
}

TEST_CASE("evaluation records serialize and parse back") {
  auto e = evaluation("d", two_stage(), 0.75);
  e.pipeline_origin = PipelineOrigin{"donor", SourceTag::H};
  e.fold_scores = {0.5, 1.0};
  e.wall_time_ms = 12;
  const auto back = evaluation_from_json(evaluation_to_json(e));
  CHECK(back.dataset_id == "d");
  CHECK(back.pipeline_origin == e.pipeline_origin);
  CHECK(back.score == 0.75);
  CHECK(back.fold_scores == e.fold_scores);
  CHECK(back.wall_time_ms == 12);
  CHECK(back.pipeline == e.pipeline);

  const auto no_time = nlohmann::json::parse(evaluation_to_json(e, false));
  CHECK(no_time["wall_time_ms"] == 0);

  EvaluationRecord failed;
  failed.dataset_id = "d";
  failed.score = std::nan("");
  failed.failure = "stage 0 (select_k_best): k exceeds column count";
  const auto fj = nlohmann::json::parse(evaluation_to_json(failed));
  CHECK(fj["score"].is_null());
  CHECK(fj["status"] == "failed");
  CHECK(fj["pipeline_origin"] == "literal");
  const auto fb = evaluation_from_json(evaluation_to_json(failed));
  CHECK_FALSE(fb.ok());
  CHECK(std::isnan(fb.score));
}

TEST_CASE("tensor view of no evaluations is empty") {
  const Corpus c({simple_record("a")});
  const auto v = tensor_view(c, {});
  CHECK(v.entries.empty());
  CHECK(v.warnings.empty());
}

TEST_CASE("tensor keys fill unused stage slots with none") {
  const Corpus c({simple_record("a")});
  const std::vector<EvaluationRecord> evs = {evaluation("a", two_stage(), 0.9)};
  const auto v = tensor_view(c, evs);
  REQUIRE(v.entries.size() == 1);
  const TensorKey expected{"a", {"standard_scaler", "none", "none", "knn_classifier", "none"}};
  CHECK(v.entries.begin()->first == expected);
  CHECK(v.entries.begin()->second == 0.9);
}

TEST_CASE("tensor keys join repeated stage kinds") {
  const Pipeline p({{StageKind::preprocessor, "mean_imputer", {}},
                    {StageKind::preprocessor, "standard_scaler", {}},
                    {StageKind::estimator, "decision_tree", {}}});
  const auto k = tensor_key("a", p);
  CHECK(k.stages[0] == "mean_imputer+standard_scaler");
  CHECK(k.stages[3] == "decision_tree");
}

TEST_CASE("duplicate tensor keys resolve latest-wins with a warning") {
  const Corpus c({simple_record("a"), simple_record("b")});
  const Pipeline tree({{StageKind::estimator, "decision_tree", {}}});
  const Pipeline nb({{StageKind::estimator, "gaussian_naive_bayes", {}}});
  const std::vector<EvaluationRecord> evs = {
      evaluation("a", two_stage(), 0.6), evaluation("a", tree, 0.7), evaluation("b", tree, 0.8),
      evaluation("a", two_stage(), 0.65), evaluation("b", nb, 0.5)};
  const auto v = tensor_view(c, evs);
  CHECK(v.entries.size() == 4);
  CHECK(v.warnings.size() == 1);
  const TensorKey key{"a", {"standard_scaler", "none", "none", "knn_classifier", "none"}};
  CHECK(v.entries.at(key) == 0.65);
}

TEST_CASE("tensor view rejects unknown datasets") {
  const Corpus c({simple_record("a")});
  const std::vector<EvaluationRecord> evs = {evaluation("nope", two_stage(), 0.6)};
  CHECK_THROWS_AS(tensor_view(c, evs), LookupError);
}

TEST_CASE("data paths resolve against the corpus directory") {
  test::TempDir dir;
  save_corpus(Corpus({simple_record("t")}), dir / "c.jsonl");
  const auto c = load_corpus(dir / "c.jsonl");
  CHECK(c.data_file(c.at("t")) == dir.path() / "data/t.csv");
  CHECK_THROWS_AS(c.at("missing"), LookupError);
}
