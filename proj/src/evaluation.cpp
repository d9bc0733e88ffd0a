#include "telextiles/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "telextiles/errors.hpp"

namespace telextiles {

std::vector<std::vector<float>> embed_frames(const Encoder& encoder, const AugmentConfig& preprocess,
                                             const std::vector<Image>& frames) {
  std::vector<std::vector<float>> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(encoder.embed(prepare_for_inference(f, preprocess)));
  return out;
}

double knn_accuracy(const Encoder& encoder, const AugmentConfig& preprocess, const LabeledFrames& train_set,
                    const LabeledFrames& test_set, int k) {
  if (train_set.size() == 0 || test_set.size() == 0) throw ValidationError("knn_accuracy needs train and test frames");
  auto train_emb = embed_frames(encoder, preprocess, train_set.images);
  std::vector<LabeledEmbedding> entries;
  entries.reserve(train_emb.size());
  for (std::size_t i = 0; i < train_emb.size(); ++i) entries.push_back({std::move(train_emb[i]), train_set.labels[i]});
  const auto index = LatentIndex::build(std::move(entries));
  const auto test_emb = embed_frames(encoder, preprocess, test_set.images);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_emb.size(); ++i)
    if (index.knn_classify(test_emb[i], k) == test_set.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test_emb.size());
}

AblationRow run_regime(const DatasetManifest& manifest, const AcquisitionConfig& acquisition,
                       const AblationConfig& cfg, const EpochCallback& on_epoch) {
  const Dataset data = synthesize_dataset(manifest, acquisition, cfg.data_seed);
  const auto result = train(data, cfg.train_count, cfg.augment, cfg.encoder, cfg.train, on_epoch);
  return {result.max_top1, result.final_top1, result.checkpoint};
}

AblationTable jig_ablation(const DatasetManifest& manifest, const AblationConfig& cfg, const EpochCallback& on_epoch) {
  if (!cfg.with_jig.jig || cfg.without_jig.jig) throw ValidationError("ablation regimes must be jig / no jig");
  AblationTable table;
  table.with_jig = run_regime(manifest, cfg.with_jig, cfg, on_epoch);
  table.without_jig = run_regime(manifest, cfg.without_jig, cfg, on_epoch);
  return table;
}

std::string AblationTable::to_text() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "With Jig  Max@top1 (%%)  Final@top1 (%%)\n"
                "yes       %13.2f  %15.2f\n"
                "no        %13.2f  %15.2f\n",
                100.0 * with_jig.max_top1, 100.0 * with_jig.final_top1, 100.0 * without_jig.max_top1,
                100.0 * without_jig.final_top1);
  return buf;
}

void SimilarityTrial::validate() const {
  if (model_ranking.size() != static_cast<std::size_t>(kBoardSize))
    throw ValidationError("model ranking must list all " + std::to_string(kBoardSize) + " board samples");
  const std::set<std::string> board(model_ranking.begin(), model_ranking.end());
  if (board.size() != model_ranking.size()) throw ValidationError("model ranking has duplicate ids");
  if (human_top5.size() != 5) throw ValidationError("human ranking must have exactly 5 entries");
  const std::set<std::string> picks(human_top5.begin(), human_top5.end());
  if (picks.size() != 5) throw DegenerateInputError("human ranking has tied (repeated) entries");
  for (const auto& id : human_top5)
    if (!board.count(id)) throw ValidationError("human pick " + id + " is not on the board");
}

double topk_accuracy(const std::vector<SimilarityTrial>& trials, int k) {
  if (k < 1 || k > kBoardSize) throw ValidationError("K must be in [1, 16]");
  if (trials.empty()) throw ValidationError("no trials");
  std::size_t hits = 0;
  for (const auto& t : trials) {
    t.validate();
    const auto end = t.model_ranking.begin() + k;
    if (std::find(t.model_ranking.begin(), end, t.human_top5.front()) != end) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials.size());
}

double random_baseline(int k, int board_size) {
  if (board_size < 1 || k < 0 || k > board_size) throw ValidationError("K must be in [0, board_size]");
  return static_cast<double>(k) / static_cast<double>(board_size);
}

double spearman_rho(const SimilarityTrial& trial) {
  trial.validate();
  constexpr int n = 5;
  std::array<std::ptrdiff_t, n> positions{};
  for (int i = 0; i < n; ++i)
    positions[i] = std::find(trial.model_ranking.begin(), trial.model_ranking.end(), trial.human_top5[i]) -
                   trial.model_ranking.begin();
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    // Rank of item i among the five by model position (distinct positions, no ties).
    const auto model_rank = 1 + std::count_if(positions.begin(), positions.end(),
                                              [&](std::ptrdiff_t p) { return p < positions[i]; });
    const double d = static_cast<double>(i + 1 - model_rank);
    sum_sq += d * d;
  }
  return 1.0 - 6.0 * sum_sq / (n * (n * n - 1.0));
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta needs x in [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t > 0 ? tail : 1.0 - tail;
}

TTestResult t_test_vs_zero(const std::vector<double>& values, Alternative alternative) {
  const std::size_t n = values.size();
  if (n < 2) throw DegenerateInputError("t-test needs at least two values");
  // Rounding in the mean would otherwise leave a tiny non-zero spread.
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw DegenerateInputError("t-test on values with zero variance");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw DegenerateInputError("t-test on values with zero variance");
  TTestResult r;
  r.df = static_cast<double>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  switch (alternative) {
    case Alternative::TwoSided: r.p = std::min(1.0, 2.0 * student_t_sf(std::abs(r.t), r.df)); break;
    case Alternative::Greater: r.p = student_t_sf(r.t, r.df); break;
    case Alternative::Less: r.p = student_t_sf(-r.t, r.df); break;
  }
  return r;
}

std::vector<SimilarityTrial> generate_synthetic_trials(const LatentIndex& index, const RollerConfig& roller,
                                                       double noise, int n_trials, std::uint64_t seed) {
  roller.validate();
  if (roller.slot_count() != kBoardSize) throw ValidationError("trials need a 16-slot board");
  if (!(noise >= 0.0)) throw ValidationError("noise must be non-negative");
  if (n_trials < 1) throw ValidationError("n_trials must be positive");

  std::vector<std::string> queries;
  for (const auto& [id, c] : index.centroids())
    if (roller.slot_of(id) < 0) queries.push_back(id);
  if (queries.empty())
    for (const auto& [id, c] : index.centroids()) queries.push_back(id);

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, queries.size() - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<SimilarityTrial> trials;
  trials.reserve(n_trials);
  for (int t = 0; t < n_trials; ++t) {
    SimilarityTrial trial;
    trial.query_sample_id = queries[pick(rng)];
    const auto ranked = index.rank_among(index.centroid(trial.query_sample_id), roller.slot_samples);
    double mean = 0.0, var = 0.0;
    for (const auto& n : ranked) mean += n.distance;
    mean /= static_cast<double>(ranked.size());
    for (const auto& n : ranked) var += (n.distance - mean) * (n.distance - mean);
    const double spread = var > 0.0 ? std::sqrt(var / static_cast<double>(ranked.size())) : 1.0;

    std::vector<std::pair<double, std::size_t>> felt;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      trial.model_ranking.push_back(ranked[i].sample_id);
      const double score = std::isinf(noise) ? uniform(rng) : ranked[i].distance + noise * spread * gauss(rng);
      felt.emplace_back(score, i);
    }
    std::sort(felt.begin(), felt.end());
    for (int i = 0; i < 5; ++i) trial.human_top5.push_back(ranked[felt[i].second].sample_id);
    trials.push_back(std::move(trial));
  }
  return trials;
}

EvalReport evaluate_trials(const std::vector<SimilarityTrial>& trials, Alternative alternative) {
  EvalReport report;
  for (int k = 1; k <= kBoardSize; ++k) report.topk_curve[k] = topk_accuracy(trials, k);
  for (const auto& t : trials) report.spearman_rhos.push_back(spearman_rho(t));
  const auto test = t_test_vs_zero(report.spearman_rhos, alternative);
  report.t_statistic = test.t;
  report.p_value = test.p;
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json doc;
  if (max_top1) doc["max_top1"] = *max_top1;
  if (final_top1) doc["final_top1"] = *final_top1;
  doc["topk_curve"] = nlohmann::json::object();
  for (const auto& [k, v] : topk_curve) doc["topk_curve"][std::to_string(k)] = v;
  doc["spearman_rhos"] = spearman_rhos;
  doc["t_statistic"] = t_statistic;
  doc["p_value"] = p_value;
  return doc.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  char buf[128];
  if (max_top1 && final_top1) {
    std::snprintf(buf, sizeof buf, "Max@top1 %.4f  Final@top1 %.4f\n", *max_top1, *final_top1);
    out << buf;
  }
  out << "  K  top-K   random\n";
  for (const auto& [k, v] : topk_curve) {
    std::snprintf(buf, sizeof buf, "%3d  %.4f  %.4f\n", k, v, random_baseline(k));
    out << buf;
  }
  const double mean_rho = spearman_rhos.empty()
                              ? 0.0
                              : std::accumulate(spearman_rhos.begin(), spearman_rhos.end(), 0.0) /
                                    static_cast<double>(spearman_rhos.size());
  std::snprintf(buf, sizeof buf, "trials %zu  mean rho %.4f  t %.4f  p %.6f\n", spearman_rhos.size(), mean_rho,
                t_statistic, p_value);
  out << buf;
  return out.str();
}

std::string topk_curve_svg(const std::map<int, double>& curve, int board_size) {
  constexpr double kW = 480, kH = 320, kLeft = 50, kRight = 20, kTop = 20, kBottom = 40;
  auto px = [&](double k) { return kLeft + (kW - kLeft - kRight) * k / board_size; };
  auto py = [&](double v) { return kH - kBottom - (kH - kTop - kBottom) * v; };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(board_size) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << px(board_size / 2.0) << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">K</text>\n";
  svg << "<text x=\"12\" y=\"" << py(0.5) << "\" transform=\"rotate(-90 12 " << py(0.5)
      << ")\" text-anchor=\"middle\">Top-K accuracy</text>\n";
  svg << "<line class=\"random\" x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(board_size)
      << "\" y2=\"" << py(1) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<polyline class=\"model\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"" << px(0) << ","
      << py(0);
  for (const auto& [k, v] : curve) svg << " " << px(k) << "," << py(v);
  svg << "\"/>\n";
  for (const auto& [k, v] : curve)
    svg << "<circle cx=\"" << px(k) << "\" cy=\"" << py(v) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace telextiles
