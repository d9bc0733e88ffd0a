#include "telextiles/latent_index.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "telextiles/errors.hpp"

namespace telextiles {

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ValidationError("distance between vectors of different dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<float> mean_vector(std::span<const std::vector<float>> vectors) {
  if (vectors.empty()) throw ValidationError("mean of an empty set");
  const std::size_t dim = vectors.front().size();
  std::vector<double> sum(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ValidationError("vectors have mixed dimensions");
    for (std::size_t d = 0; d < dim; ++d) sum[d] += v[d];
  }
  std::vector<float> out(dim);
  for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<float>(sum[d] / static_cast<double>(vectors.size()));
  return out;
}

LatentIndex LatentIndex::build(std::vector<LabeledEmbedding> entries) {
  if (entries.empty()) throw ValidationError("cannot build an index from no embeddings");
  LatentIndex index;
  index.dim_ = static_cast<int>(entries.front().vector.size());
  if (index.dim_ == 0) throw ValidationError("embeddings must be non-empty");
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
  for (const auto& e : entries) {
    if (static_cast<int>(e.vector.size()) != index.dim_)
      throw ValidationError("embedding dimension mismatch: expected " + std::to_string(index.dim_) + ", got " +
                            std::to_string(e.vector.size()));
    auto& [sum, count] = sums[e.sample_id];
    sum.resize(index.dim_, 0.0);
    for (int d = 0; d < index.dim_; ++d) sum[d] += e.vector[d];
    ++count;
  }
  for (const auto& [id, acc] : sums) {
    std::vector<float> c(index.dim_);
    for (int d = 0; d < index.dim_; ++d) c[d] = static_cast<float>(acc.first[d] / static_cast<double>(acc.second));
    index.centroids_.emplace(id, std::move(c));
  }
  index.entries_ = std::move(entries);
  return index;
}

LatentIndex LatentIndex::from_centroids(int dim, std::map<std::string, std::vector<float>> centroids) {
  if (dim < 1 || centroids.empty()) throw ValidationError("centroid index needs a dimension and centroids");
  for (const auto& [id, c] : centroids)
    if (static_cast<int>(c.size()) != dim) throw ValidationError("centroid " + id + " has the wrong dimension");
  LatentIndex index;
  index.dim_ = dim;
  index.centroids_ = std::move(centroids);
  return index;
}

const std::vector<float>& LatentIndex::centroid(const std::string& sample_id) const {
  auto it = centroids_.find(sample_id);
  if (it == centroids_.end()) throw ValidationError("no centroid for sample " + sample_id);
  return it->second;
}

std::string LatentIndex::knn_classify(std::span<const float> query, int k) const {
  if (entries_.empty()) throw ValidationError("knn_classify on an empty index");
  if (k < 1 || k > static_cast<int>(entries_.size())) throw ValidationError("k must be in [1, entry count]");
  struct Hit {
    double distance;
    const std::string* label;
    std::size_t entry;
  };
  std::vector<Hit> hits;
  hits.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i)
    hits.push_back({euclidean_distance(query, entries_[i].vector), &entries_[i].sample_id, i});
  auto before = [](const Hit& a, const Hit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (*a.label != *b.label) return *a.label < *b.label;
    return a.entry < b.entry;
  };
  std::partial_sort(hits.begin(), hits.begin() + k, hits.end(), before);

  std::map<std::string, int> votes;
  int best = 0;
  for (int i = 0; i < k; ++i) best = std::max(best, ++votes[*hits[i].label]);
  for (int i = 0; i < k; ++i)
    if (votes[*hits[i].label] == best) return *hits[i].label;
  return *hits[0].label;  // unreachable
}

namespace {

void sort_neighbors(std::vector<Neighbor>& ranked) {
  std::stable_sort(ranked.begin(), ranked.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.sample_id < b.sample_id;
  });
}

}  // namespace

std::vector<Neighbor> LatentIndex::top_k_similar(std::span<const float> query, int k) const {
  if (centroids_.empty()) throw ValidationError("index has no centroids");
  if (k < 1 || k > static_cast<int>(centroids_.size())) throw ValidationError("K exceeds the number of samples");
  std::vector<Neighbor> ranked;
  ranked.reserve(centroids_.size());
  for (const auto& [id, c] : centroids_) ranked.push_back({id, euclidean_distance(query, c)});
  sort_neighbors(ranked);
  ranked.resize(k);
  return ranked;
}

Neighbor LatentIndex::nearest_sample(std::span<const float> query) const { return top_k_similar(query, 1).front(); }

std::vector<Neighbor> LatentIndex::rank_among(std::span<const float> query,
                                              std::span<const std::string> sample_ids) const {
  if (sample_ids.empty()) throw ValidationError("rank_among needs at least one sample");
  std::vector<Neighbor> ranked;
  for (const auto& id : sample_ids) ranked.push_back({id, euclidean_distance(query, centroid(id))});
  sort_neighbors(ranked);
  return ranked;
}

std::string LatentIndex::export_json() const {
  nlohmann::json doc;
  doc["dim"] = dim_;
  doc["centroids"] = nlohmann::json::object();
  for (const auto& [id, c] : centroids_) doc["centroids"][id] = c;
  return doc.dump();
}

LatentIndex LatentIndex::import_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    std::map<std::string, std::vector<float>> centroids;
    for (const auto& [id, values] : doc.at("centroids").items()) centroids[id] = values.get<std::vector<float>>();
    return from_centroids(doc.at("dim").get<int>(), std::move(centroids));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed index document: ") + e.what());
  }
}

}  // namespace telextiles
