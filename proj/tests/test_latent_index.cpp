#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "telextiles/errors.hpp"
#include "telextiles/latent_index.hpp"

using namespace telextiles;

namespace {

LabeledEmbedding e(std::vector<float> v, std::string id) { return {std::move(v), std::move(id)}; }

// Exhaustive oracle written independently of the index.
std::string oracle_knn(const std::vector<LabeledEmbedding>& entries, const std::vector<float>& q, int k) {
  std::vector<std::tuple<double, std::string, std::size_t>> d;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (entries[i].vector[j] - q[j]) * (entries[i].vector[j] - q[j]);
    d.emplace_back(std::sqrt(s), entries[i].sample_id, i);
  }
  std::sort(d.begin(), d.end());
  std::map<std::string, int> votes;
  for (int i = 0; i < k; ++i) ++votes[std::get<1>(d[i])];
  int best = 0;
  for (const auto& [id, n] : votes) best = std::max(best, n);
  for (int i = 0; i < k; ++i)
    if (votes[std::get<1>(d[i])] == best) return std::get<1>(d[i]);
  return {};
}

}  // namespace

TEST_CASE("centroids are entry means") {
  const auto idx = LatentIndex::build({e({0, 0}, "A"), e({2, 2}, "A"), e({5, -1}, "B")});
  CHECK(idx.dim() == 2);
  CHECK(idx.centroid("A") == std::vector<float>{1, 1});
  CHECK(idx.centroid("B") == std::vector<float>{5, -1});
  CHECK(idx.centroids().size() == 2);
  CHECK_THROWS_AS(idx.centroid("C"), ValidationError);
}

TEST_CASE("centroids are order independent") {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n;
  std::vector<LabeledEmbedding> entries;
  for (int i = 0; i < 40; ++i) entries.push_back(e({n(rng), n(rng), n(rng)}, "s" + std::to_string(i % 4)));
  auto shuffled = entries;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = LatentIndex::build(entries), b = LatentIndex::build(shuffled);
  for (const auto& [id, c] : a.centroids())
    for (std::size_t j = 0; j < c.size(); ++j) CHECK(c[j] == doctest::Approx(b.centroid(id)[j]).epsilon(1e-6));
}

TEST_CASE("build rejects bad input") {
  CHECK_THROWS_AS(LatentIndex::build({}), ValidationError);
  CHECK_THROWS_AS(LatentIndex::build({e({0, 0}, "A"), e({1, 0, 0}, "B")}), ValidationError);
}

TEST_CASE("knn worked examples") {
  const auto idx = LatentIndex::build({e({0, 0}, "A"), e({1, 0}, "A"), e({5, 5}, "B")});
  const std::vector<float> q{0.1f, 0.0f};
  CHECK(idx.knn_classify(q, 3) == "A");
  const std::vector<float> on_b{5, 5};
  CHECK(idx.knn_classify(on_b, 1) == "B");
  CHECK_THROWS_AS(idx.knn_classify(q, 4), ValidationError);
  CHECK_THROWS_AS(idx.knn_classify(q, 0), ValidationError);

  const auto tie = LatentIndex::build({e({2, 0}, "B"), e({0, 0}, "A")});
  const std::vector<float> mid{1, 0};
  CHECK(tie.knn_classify(mid, 2) == "A");
  CHECK(tie.knn_classify(mid, 1) == "A");
}

TEST_CASE("nearest sample and top-k") {
  const auto idx = LatentIndex::from_centroids(2, {{"A", {0, 0}}, {"B", {3, 4}}});
  const std::vector<float> q{1, 1};
  const auto n = idx.nearest_sample(q);
  CHECK(n.sample_id == "A");
  CHECK(n.distance == doctest::Approx(std::sqrt(2.0)));
  const std::vector<float> b{3, 4};
  CHECK(idx.nearest_sample(b) == Neighbor{"B", 0.0});
  const std::vector<float> mid{1.5f, 2.0f};
  CHECK(idx.nearest_sample(mid).sample_id == "A");

  const auto line = LatentIndex::from_centroids(1, {{"far", {3}}, {"near", {1}}, {"mid", {2}}});
  const std::vector<float> origin{0};
  const auto top = line.top_k_similar(origin, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].sample_id == "near");
  CHECK(top[1].sample_id == "mid");
  CHECK(top[2].sample_id == "far");
  CHECK(line.top_k_similar(origin, 1).front() == line.nearest_sample(origin));
  CHECK_THROWS_AS(line.top_k_similar(origin, 4), ValidationError);
}

TEST_CASE("knn and top-k agree with an exhaustive oracle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> n;
  std::vector<LabeledEmbedding> entries;
  for (int i = 0; i < 300; ++i) {
    // Coarse grid values create plenty of exact distance ties.
    std::vector<float> v{std::round(n(rng) * 2) / 2, std::round(n(rng) * 2) / 2, std::round(n(rng) * 2) / 2};
    entries.push_back(e(v, "s" + std::to_string(i % 9)));
  }
  const auto idx = LatentIndex::build(entries);
  for (int t = 0; t < 1000; ++t) {
    const std::vector<float> q{std::round(n(rng) * 2) / 2, std::round(n(rng) * 2) / 2, std::round(n(rng) * 2) / 2};
    const int k = 1 + t % 7;
    REQUIRE(idx.knn_classify(q, k) == oracle_knn(entries, q, k));

    const auto all = idx.top_k_similar(q, 9);
    for (std::size_t i = 1; i < all.size(); ++i) {
      REQUIRE(all[i - 1].distance <= all[i].distance);
      if (all[i - 1].distance == all[i].distance) REQUIRE(all[i - 1].sample_id < all[i].sample_id);
    }
    const auto prefix = idx.top_k_similar(q, k);
    REQUIRE(std::equal(prefix.begin(), prefix.end(), all.begin()));
  }
}

TEST_CASE("single-vector sample is at distance zero from itself") {
  const auto idx = LatentIndex::build({e({0.3f, -0.4f}, "solo"), e({1, 1}, "x"), e({1, 2}, "x")});
  CHECK(idx.nearest_sample(idx.centroid("solo")).distance == 0.0);
}

TEST_CASE("rank_among restricts the ranking") {
  const auto idx = LatentIndex::from_centroids(1, {{"a", {0}}, {"b", {1}}, {"c", {2}}, {"d", {3}}});
  const std::vector<float> q{2.1f};
  const std::vector<std::string> board{"a", "b", "d"};
  const auto r = idx.rank_among(q, board);
  REQUIRE(r.size() == 3);
  CHECK(r[0].sample_id == "d");
  CHECK(r[1].sample_id == "b");
  CHECK(r[2].sample_id == "a");
  const std::vector<std::string> unknown{"zz"};
  CHECK_THROWS_AS(idx.rank_among(q, unknown), ValidationError);
}

TEST_CASE("index export round-trips bit-exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-1, 1);
  std::vector<LabeledEmbedding> entries;
  for (int i = 0; i < 30; ++i) entries.push_back(e({u(rng), u(rng), u(rng), 1e-30f}, "id" + std::to_string(i % 5)));
  const auto idx = LatentIndex::build(entries);
  const auto text = idx.export_json();
  const auto back = LatentIndex::import_json(text);
  CHECK(back.dim() == 4);
  CHECK(back.centroids() == idx.centroids());
  CHECK(back.export_json() == text);
}

TEST_CASE("index import rejects malformed documents") {
  CHECK_THROWS_AS(LatentIndex::import_json("not json"), ValidationError);
  CHECK_THROWS_AS(LatentIndex::import_json(R"({"dim": 2})"), ValidationError);
  CHECK_THROWS_AS(LatentIndex::import_json(R"({"dim": 2, "centroids": {"a": [1]}})"), ValidationError);
  CHECK_THROWS_AS(LatentIndex::import_json(R"({"dim": 2, "centroids": {"a": [1, "x"]}})"), ValidationError);
  CHECK_THROWS_AS(LatentIndex::import_json(R"({"dim": 2, "centroids": {}})"), ValidationError);
}

TEST_CASE("euclidean distance and mean vector") {
  const std::vector<float> a{0, 0}, b{3, 4};
  CHECK(euclidean_distance(a, b) == 5.0);
  const std::vector<float> c{1};
  CHECK_THROWS_AS(euclidean_distance(a, c), ValidationError);
  const std::vector<std::vector<float>> vs{{0, 0}, {2, 2}, {4, -2}};
  CHECK(mean_vector(vs) == std::vector<float>{2, 0});
  CHECK_THROWS_AS(mean_vector(std::vector<std::vector<float>>{}), ValidationError);
}
