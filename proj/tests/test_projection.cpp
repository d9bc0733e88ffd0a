#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "support.hpp"
#include "telextiles/errors.hpp"
#include "telextiles/projection.hpp"

using namespace telextiles;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::vector<float>> gaussian_cloud(int n, int d, std::uint64_t seed, const std::vector<double>& scales) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::vector<float>> out(n, std::vector<float>(d));
  for (auto& v : out)
    for (int j = 0; j < d; ++j) v[j] = static_cast<float>(g(rng) * scales[j]);
  return out;
}

}  // namespace

TEST_CASE("collinear points: first axis is the diagonal") {
  const std::vector<std::vector<float>> pts{{1, 1}, {-1, -1}, {2, 2}, {-2, -2}};
  const auto m = pca_fit(pts, 1);
  CHECK(m.components[0][0] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(m.components[0][1] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("axes are orthonormal, variance ordered and sign normalized") {
  const auto data = gaussian_cloud(200, 6, 1, {3, 2.5, 2, 1.5, 1, 0.5});
  const auto m = pca_fit(data, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) CHECK(dot(m.components[i], m.components[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-6));
    if (i > 0) CHECK(m.explained_variance[i] <= m.explained_variance[i - 1]);
    const auto& c = m.components[i];
    const auto it = std::max_element(c.begin(), c.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    CHECK(*it > 0.0);
  }
}

TEST_CASE("axes match a dense eigensolver on random 5-D data") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXd mix(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) mix(i, j) = g(rng);
  std::vector<std::vector<float>> data;
  Eigen::MatrixXd x(300, 5);
  for (int r = 0; r < 300; ++r) {
    Eigen::VectorXd z(5);
    for (int j = 0; j < 5; ++j) z(j) = g(rng);
    const Eigen::VectorXd v = mix * z;
    std::vector<float> row(5);
    for (int j = 0; j < 5; ++j) {
      row[j] = static_cast<float>(v(j));
      x(r, j) = row[j];
    }
    data.push_back(row);
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 299.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);

  const auto m = pca_fit(data, 5);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd ref = solver.eigenvectors().col(4 - i);  // Eigen sorts ascending
    double c = 0;
    for (int j = 0; j < 5; ++j) c += ref(j) * m.components[i][j];
    CHECK(std::abs(c) >= 0.999);
    CHECK(m.explained_variance[i] == doctest::Approx(solver.eigenvalues()(4 - i)).epsilon(1e-6));
  }
}

TEST_CASE("jacobi eigensolver agrees with Eigen on a symmetric matrix") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  std::vector<std::vector<double>> mat(7, std::vector<double>(7));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) mat[i][j] = a(i, j);
  const auto ed = symmetric_eigen(mat);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  for (int i = 0; i < 7; ++i) {
    CHECK(ed.values[i] == doctest::Approx(solver.eigenvalues()(6 - i)).epsilon(1e-8));
    // A v = lambda v
    for (int r = 0; r < 7; ++r) {
      double av = 0;
      for (int c = 0; c < 7; ++c) av += mat[r][c] * ed.vectors[i][c];
      CHECK(av == doctest::Approx(ed.values[i] * ed.vectors[i][r]).epsilon(1e-6).scale(1.0));
    }
  }
  CHECK_THROWS_AS(symmetric_eigen({{1, 2}, {3, 4}}), ValidationError);
}

TEST_CASE("isotropic data has near-equal explained variances") {
  const auto data = gaussian_cloud(20000, 4, 4, {1, 1, 1, 1});
  const auto m = pca_fit(data, 4);
  CHECK(m.explained_variance.back() / m.explained_variance.front() > 0.9);
}

TEST_CASE("planted rank-1 direction is recovered") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> dir{0.2, -0.5, 0.1, 0.7, 0.3, -0.1, 0.0, 0.3};
  const double len = std::sqrt(dot(dir, dir));
  for (auto& x : dir) x /= len;
  std::vector<std::vector<float>> data;
  for (int i = 0; i < 100; ++i) {
    const double t = g(rng) * 3;
    std::vector<float> v(8);
    for (int j = 0; j < 8; ++j) v[j] = static_cast<float>(t * dir[j] + 0.01 * g(rng));
    data.push_back(v);
  }
  const auto m = pca_fit(data, 1);
  CHECK(std::abs(dot(m.components[0], dir)) >= 0.999);
}

TEST_CASE("project: mean, on-axis point and exact rank-n reconstruction") {
  const std::vector<std::vector<float>> pts{{1, 1}, {-1, -1}, {2, 2}, {-2, -2}};
  const auto m = pca_fit(pts, 2);
  const std::vector<float> mean{0, 0};
  for (double v : project(m, mean, 2)) CHECK(v == doctest::Approx(0.0));
  const std::vector<float> on_axis{3, 3};
  const auto p = project(m, on_axis, 2);
  CHECK(std::abs(p[0]) == doctest::Approx(3 * std::sqrt(2.0)));
  CHECK(p[1] == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(project(m, on_axis, 3), ValidationError);

  // Rank-2 data in 5-D reconstructs from two coordinates.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const std::vector<double> a{1, 0, 2, -1, 0.5}, b{0, 1, -1, 0.5, 2};
  std::vector<std::vector<float>> data;
  for (int i = 0; i < 50; ++i) {
    const double s = g(rng), t = g(rng);
    std::vector<float> v(5);
    for (int j = 0; j < 5; ++j) v[j] = static_cast<float>(1.0 + s * a[j] + t * b[j]);
    data.push_back(v);
  }
  const auto model = pca_fit(data, 2);
  double worst = 0;
  for (const auto& v : data) {
    const auto c = project(model, v, 2);
    for (int j = 0; j < 5; ++j) {
      const double rec = model.mean[j] + c[0] * model.components[0][j] + c[1] * model.components[1][j];
      worst = std::max(worst, std::abs(rec - v[j]));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("project is affine") {
  const auto data = gaussian_cloud(60, 5, 7, {2, 1, 1, 0.5, 0.2});
  const auto m = pca_fit(data, 3);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    const auto& x = data[t];
    const auto& y = data[59 - t];
    const double alpha = u(rng);
    std::vector<float> mix(5);
    for (int j = 0; j < 5; ++j) mix[j] = static_cast<float>(alpha * x[j] + (1 - alpha) * y[j]);
    const auto pm = project(m, mix, 3), px = project(m, x, 3), py = project(m, y, 3);
    for (int j = 0; j < 3; ++j) CHECK(pm[j] == doctest::Approx(alpha * px[j] + (1 - alpha) * py[j]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("pca input validation") {
  const std::vector<std::vector<float>> one{{1, 2}};
  CHECK_THROWS_AS(pca_fit(one, 1), ValidationError);
  const std::vector<std::vector<float>> two{{1, 2}, {3, 4}};
  CHECK_THROWS_AS(pca_fit(two, 3), ValidationError);
  const std::vector<std::vector<float>> ragged{{1, 2}, {3}};
  CHECK_THROWS_AS(pca_fit(ragged, 1), ValidationError);
}

TEST_CASE("select_equidistant worked examples") {
  std::map<std::string, double> evens;
  for (int i = 0; i < 16; ++i) evens["e" + std::to_string(100 + 2 * i)] = 2.0 * i;
  CHECK(select_equidistant(evens, 4) == std::vector<std::string>{"e100", "e110", "e120", "e130"});

  const auto all = select_equidistant(evens, 16);
  CHECK(all.size() == 16);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(evens.at(all[i - 1]) < evens.at(all[i]));

  const std::map<std::string, double> ends{{"a", 0}, {"b", 1}, {"c", 9}, {"d", 10}};
  CHECK(select_equidistant(ends, 2) == std::vector<std::string>{"a", "d"});
  CHECK_THROWS_AS(select_equidistant(ends, 5), ValidationError);
  CHECK_THROWS_AS(select_equidistant(ends, 1), ValidationError);
}

TEST_CASE("select_equidistant tie rule and ordering on random scalars") {
  const std::map<std::string, double> tie{{"lo", 4.0}, {"hi", 6.0}, {"a", 0.0}, {"z", 10.0}};
  // Target 5 is equidistant from 4 and 6: the smaller scalar wins.
  CHECK(select_equidistant(tie, 3) == std::vector<std::string>{"a", "lo", "z"});

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    std::map<std::string, double> s;
    const int n = 16 + t % 30;
    for (int i = 0; i < n; ++i) s["s" + std::to_string(i)] = g(rng);
    const int count = 2 + t % 15;
    const auto picks = select_equidistant(s, count);
    REQUIRE(static_cast<int>(picks.size()) == count);
    for (std::size_t i = 1; i < picks.size(); ++i) REQUIRE(s.at(picks[i - 1]) < s.at(picks[i]));
  }
}

TEST_CASE("2-D map export and sidecar") {
  testing::TempDir dir("map");
  const std::map<std::string, std::array<double, 2>> pts{
      {"a", {0.0, 1.0}}, {"b", {-2.5, 0.125}}, {"c", {0.1, 1e-7}}, {"twin", {0.0, 1.0}}};
  const auto svg = dir / "map.svg";
  export_map_2d(pts, svg);
  std::ifstream in(svg);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.rfind("<svg", 0) == 0);
  const std::regex glyph("<circle class=\"sample\"");
  CHECK(std::distance(std::sregex_iterator(text.begin(), text.end(), glyph), std::sregex_iterator()) == 4);
  CHECK(sidecar_path(svg) == dir / "map.json");
  const auto back = read_map_sidecar(sidecar_path(svg));
  CHECK(back == pts);
  CHECK(back.at("a") == back.at("twin"));
}
