#include "telextiles/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "telextiles/errors.hpp"

namespace telextiles {

EigenDecomposition symmetric_eigen(std::vector<std::vector<double>> a, double tolerance) {
  const std::size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw ValidationError("eigen decomposition needs a square matrix");
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  double frob = 0.0;
  for (const auto& row : a)
    for (double x : row) frob += x * x;
  frob = std::sqrt(frob);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a[i][j] - a[j][i]) > 1e-12 * frob) throw ValidationError("matrix is not symmetric");
  const double threshold = tolerance * std::max(frob, std::numeric_limits<double>::min());

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a[p][q]));
    if (off < threshold) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < threshold * 1e-3) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenDecomposition out;
  for (std::size_t i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

PcaModel pca_fit(std::span<const std::vector<float>> vectors, int n_components) {
  if (vectors.size() < 2) throw ValidationError("PCA needs at least two vectors");
  const std::size_t dim = vectors.front().size();
  if (n_components < 1 || static_cast<std::size_t>(n_components) > dim)
    throw ValidationError("n_components must be in [1, D]");
  PcaModel model;
  model.mean.assign(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ValidationError("PCA input has mixed dimensions");
    for (std::size_t d = 0; d < dim; ++d) model.mean[d] += v[d];
  }
  for (double& m : model.mean) m /= static_cast<double>(vectors.size());

  std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
  std::vector<double> centered(dim);
  for (const auto& v : vectors) {
    for (std::size_t d = 0; d < dim; ++d) centered[d] = v[d] - model.mean[d];
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i; j < dim; ++j) cov[i][j] += centered[i] * centered[j];
  }
  const double denom = static_cast<double>(vectors.size() - 1);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) cov[j][i] = cov[i][j] /= denom;

  auto eig = symmetric_eigen(std::move(cov));
  for (int c = 0; c < n_components; ++c) {
    auto axis = eig.vectors[c];
    const auto big = std::max_element(axis.begin(), axis.end(),
                                      [](double x, double y) { return std::abs(x) < std::abs(y); });
    if (*big < 0)
      for (double& x : axis) x = -x;
    model.components.push_back(std::move(axis));
    model.explained_variance.push_back(std::max(0.0, eig.values[c]));
  }
  return model;
}

std::vector<double> project(const PcaModel& model, std::span<const float> vector, int n) {
  if (n < 0 || n > static_cast<int>(model.components.size())) throw ValidationError("not that many components");
  if (vector.size() != model.mean.size()) throw ValidationError("projected vector has the wrong dimension");
  std::vector<double> out(n, 0.0);
  for (int c = 0; c < n; ++c)
    for (std::size_t d = 0; d < vector.size(); ++d) out[c] += (vector[d] - model.mean[d]) * model.components[c][d];
  return out;
}

std::vector<std::string> select_equidistant(const std::map<std::string, double>& scalar_by_sample, int count) {
  if (count < 2) throw ValidationError("count must be >= 2");
  if (count > static_cast<int>(scalar_by_sample.size())) throw ValidationError("count exceeds the number of samples");
  std::vector<std::pair<double, std::string>> pool;
  for (const auto& [id, s] : scalar_by_sample) pool.emplace_back(s, id);
  std::sort(pool.begin(), pool.end());
  const double lo = pool.front().first;
  const double hi = pool.back().first;

  std::vector<bool> used(pool.size(), false);
  std::vector<std::size_t> chosen;
  for (int i = 0; i < count; ++i) {
    const double target = lo + i * (hi - lo) / (count - 1);
    std::size_t best = pool.size();
    double best_gap = std::numeric_limits<double>::infinity();
    // pool is sorted by (scalar, id), so strict < keeps the tie rule.
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (used[j]) continue;
      const double gap = std::abs(pool[j].first - target);
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    used[best] = true;
    chosen.push_back(best);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<std::string> out;
  for (std::size_t j : chosen) out.push_back(pool[j].second);
  return out;
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& svg_path) {
  auto p = svg_path;
  p.replace_extension(".json");
  return p;
}

void export_map_2d(const std::map<std::string, std::array<double, 2>>& points, const std::filesystem::path& svg_path) {
  if (points.empty()) throw ValidationError("nothing to plot");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& [id, p] : points) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;
  const double yspan = ymax > ymin ? ymax - ymin : 1.0;
  constexpr double kSize = 600, kMargin = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& [id, p] : points) {
    const double x = kMargin + (kSize - 2 * kMargin) * (p[0] - xmin) / xspan;
    const double y = kSize - kMargin - (kSize - 2 * kMargin) * (p[1] - ymin) / yspan;
    const auto label = xml_escape(id);
    svg << "<g><title>" << label << "</title><circle class=\"sample\" cx=\"" << x << "\" cy=\"" << y
        << "\" r=\"5\" fill=\"teal\"/><text x=\"" << x + 7 << "\" y=\"" << y + 4 << "\" font-size=\"10\">" << label
        << "</text></g>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(svg_path);
  if (!out) throw std::runtime_error("cannot write " + svg_path.string());
  out << svg.str();

  nlohmann::json sidecar = nlohmann::json::object();
  for (const auto& [id, p] : points) sidecar[id] = {p[0], p[1]};
  std::ofstream side(sidecar_path(svg_path));
  if (!side) throw std::runtime_error("cannot write " + sidecar_path(svg_path).string());
  side << sidecar.dump(2) << '\n';
  if (!out || !side) throw std::runtime_error("short write while exporting the map");
}

std::map<std::string, std::array<double, 2>> read_map_sidecar(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open " + json_path.string());
  const auto doc = nlohmann::json::parse(in);
  std::map<std::string, std::array<double, 2>> points;
  for (const auto& [id, xy] : doc.items()) points[id] = xy.get<std::array<double, 2>>();
  return points;
}

}  // namespace telextiles
