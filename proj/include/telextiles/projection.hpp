#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace telextiles {

struct PcaModel {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // orthonormal rows, by descending variance
  std::vector<double> explained_variance;

  int dim() const { return static_cast<int>(mean.size()); }
};

struct EigenDecomposition {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

// Cyclic Jacobi rotations on a symmetric matrix until every off-diagonal entry
// is below tolerance (relative to the Frobenius norm).
EigenDecomposition symmetric_eigen(std::vector<std::vector<double>> matrix, double tolerance = 1e-9);

// Principal axes of the sample covariance (n - 1 denominator). Each axis is
// signed so that its largest-magnitude coordinate is positive.
PcaModel pca_fit(std::span<const std::vector<float>> vectors, int n_components);

std::vector<double> project(const PcaModel& model, std::span<const float> vector, int n);

// Picks `count` samples closest to equally spaced targets between the smallest
// and largest scalar. Each target takes the nearest unused sample (ties: smaller
// scalar, then smaller id). Returned in increasing scalar order.
std::vector<std::string> select_equidistant(const std::map<std::string, double>& scalar_by_sample, int count);

// Writes an SVG scatter plot (one circle per sample) and `<stem>.json` with {id: [x, y]}.
void export_map_2d(const std::map<std::string, std::array<double, 2>>& points, const std::filesystem::path& svg_path);
std::map<std::string, std::array<double, 2>> read_map_sidecar(const std::filesystem::path& json_path);

std::filesystem::path sidecar_path(const std::filesystem::path& svg_path);

}  // namespace telextiles
