#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace telextiles {

struct LabeledEmbedding {
  std::vector<float> vector;
  std::string sample_id;
};

struct Neighbor {
  std::string sample_id;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Immutable set of labeled embeddings plus per-sample centroids. All queries are
// exhaustive scans by Euclidean distance; distance ties go to the smaller
// sample id (lexicographic).
class LatentIndex {
 public:
  static LatentIndex build(std::vector<LabeledEmbedding> entries);
  // Centroid-only index, e.g. read back from an export. knn_classify needs entries.
  static LatentIndex from_centroids(int dim, std::map<std::string, std::vector<float>> centroids);

  int dim() const { return dim_; }
  const std::vector<LabeledEmbedding>& entries() const { return entries_; }
  const std::map<std::string, std::vector<float>>& centroids() const { return centroids_; }
  const std::vector<float>& centroid(const std::string& sample_id) const;

  // Majority label among the k nearest entries. Neighbors are ordered by
  // (distance, sample id, entry index); a vote tie goes to the tied label whose
  // member comes first in that order.
  std::string knn_classify(std::span<const float> query, int k) const;

  Neighbor nearest_sample(std::span<const float> query) const;
  std::vector<Neighbor> top_k_similar(std::span<const float> query, int k) const;

  // Same ordering restricted to the given sample ids (e.g. the roller board).
  std::vector<Neighbor> rank_among(std::span<const float> query, std::span<const std::string> sample_ids) const;

  // {"dim": D, "centroids": {"id": [f32, ...]}}
  std::string export_json() const;
  static LatentIndex import_json(const std::string& text);

 private:
  int dim_ = 0;
  std::vector<LabeledEmbedding> entries_;
  std::map<std::string, std::vector<float>> centroids_;
};

double euclidean_distance(std::span<const float> a, std::span<const float> b);

// Arithmetic mean of equal-length vectors, accumulated in double.
std::vector<float> mean_vector(std::span<const std::vector<float>> vectors);

}  // namespace telextiles
