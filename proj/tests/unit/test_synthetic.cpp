#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "pilot/embed.hpp"
#include "pilot/synthetic.hpp"
#include "test_util.hpp"

using namespace pilot;

TEST_CASE("separable blobs honour the margin") {
  const auto d = synthetic::separable_blobs(300, 0.75, 5);
  d.validate();
  REQUIRE(d.row_count() == 300);
  REQUIRE(d.column_count() == 2);
  const auto& labels = std::get<Labels>(d.target);
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < d.row_count(); ++i) {
    const double x = std::get<double>(d.rows[i][0]);
    const double y = std::get<double>(d.rows[i][1]);
    const double signed_distance = (x + y) / std::sqrt(2.0);
    ++counts[labels[i]];
    if (labels[i] == "pos") {
      CHECK(signed_distance >= 0.75);
    } else {
      REQUIRE(labels[i] == "neg");
      CHECK(signed_distance <= -0.75);
    }
  }
  CHECK(counts["pos"] == 150);
  CHECK(counts["neg"] == 150);
  CHECK(synthetic::separable_blobs(300, 0.75, 5) == d);
  CHECK_FALSE(synthetic::separable_blobs(300, 0.75, 6) == d);
}

TEST_CASE("label-consistent data maps equal features to equal labels") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = synthetic::label_consistent(400, 2, 2, 3, seed);
    d.validate();
    CHECK(d.column_count() == 4);
    CHECK(d.column_kinds[0] == ColumnKind::numeric);
    CHECK(d.column_kinds[3] == ColumnKind::categorical);
    const auto& labels = std::get<Labels>(d.target);
    std::map<std::string, std::string> seen;
    for (std::size_t i = 0; i < d.row_count(); ++i) {
      std::string key;
      for (const auto& c : d.rows[i]) {
        key += std::holds_alternative<double>(c) ? std::to_string(std::get<double>(c)) : std::get<std::string>(c);
        key += '|';
      }
      const auto [it, inserted] = seen.emplace(key, labels[i]);
      CHECK(it->second == labels[i]);
    }
    CHECK(std::set<std::string>(labels.begin(), labels.end()).size() >= 2);
  }
}

TEST_CASE("clustered corpus structure") {
  const auto cc = synthetic::clustered_corpus({4, 3, 50, 1});
  REQUIRE(cc.corpus.size() == 12);
  CHECK(cc.data.size() == 12);
  std::map<std::size_t, std::set<std::string>> human_by_cluster;
  for (const auto& r : cc.corpus.records()) {
    REQUIRE(r.find(SourceTag::H) != nullptr);
    CHECK(r.find(SourceTag::G) != nullptr);
    CHECK(cc.data.at(r.id()).row_count() == 50);
    human_by_cluster[cc.cluster.at(r.id())].insert(serialize_pipeline(r.find(SourceTag::H)->pipeline));
  }
  CHECK(human_by_cluster.size() == 4);
  for (const auto& [cluster, pipelines] : human_by_cluster) CHECK(pipelines.size() == 1);
  CHECK(human_by_cluster[0] == human_by_cluster[3]);

  const auto again = synthetic::clustered_corpus({4, 3, 50, 1});
  CHECK(corpus_to_jsonl(again.corpus) == corpus_to_jsonl(cc.corpus));
  CHECK(again.data == cc.data);
}

TEST_CASE("clustered metadata is closer within a cluster") {
  const auto cc = synthetic::clustered_corpus({});
  const HashedNGramEmbedder e;
  std::vector<EmbeddingVector> v;
  for (const auto& r : cc.corpus.records()) v.push_back(embed_metadata(r.metadata, e));
  double intra = 0.0;
  double inter = 0.0;
  int n_intra = 0;
  int n_inter = 0;
  const auto& rs = cc.corpus.records();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = i + 1; j < rs.size(); ++j) {
      const double d = distance(v[i], v[j]);
      if (cc.cluster.at(rs[i].id()) == cc.cluster.at(rs[j].id())) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  }
  CHECK(intra / n_intra < inter / n_inter);
}

TEST_CASE("written clustered corpora load back identically") {
  test::TempDir dir;
  const auto cc = synthetic::clustered_corpus({2, 2, 30, 7});
  const auto path = synthetic::write_clustered(cc, dir.path());
  const auto loaded = load_corpus(path);
  CHECK(corpus_to_jsonl(loaded) == corpus_to_jsonl(cc.corpus));
  for (const auto& r : loaded.records()) {
    const auto file = loaded.data_file(r);
    REQUIRE(file.has_value());
    CHECK(load_csv(*file, r.task.target_column) == cc.data.at(r.id()));
  }
}

TEST_CASE("random corpora are valid and seeded") {
  const auto c = synthetic::random_corpus(200, 9);
  REQUIRE(c.size() == 200);
  std::set<std::string> ids;
  for (const auto& r : c.records()) {
    ids.insert(r.id());
    CHECK(r.find(SourceTag::H) != nullptr);
    CHECK_FALSE(r.metadata.title.empty());
  }
  CHECK(ids.size() == 200);
  CHECK(corpus_to_jsonl(synthetic::random_corpus(200, 9)) == corpus_to_jsonl(c));
  CHECK(corpus_to_jsonl(synthetic::random_corpus(200, 10)) != corpus_to_jsonl(c));
  CHECK(corpus_to_jsonl(parse_corpus(corpus_to_jsonl(c))) == corpus_to_jsonl(c));
}
