#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "telextiles/latent_index.hpp"
#include "telextiles/network.hpp"
#include "telextiles/roller.hpp"
#include "telextiles/tactile_data.hpp"
#include "telextiles/trainer.hpp"

namespace telextiles {

inline constexpr int kBoardSize = 16;

// Embeds every frame on the inference path (center crop, normalize).
std::vector<std::vector<float>> embed_frames(const Encoder& encoder, const AugmentConfig& preprocess,
                                             const std::vector<Image>& frames);

// Fraction of test frames whose k-NN label (index built on the train set) is right.
double knn_accuracy(const Encoder& encoder, const AugmentConfig& preprocess, const LabeledFrames& train_set,
                    const LabeledFrames& test_set, int k = 1);

struct AblationConfig {
  AcquisitionConfig with_jig = AcquisitionConfig::with_jig();
  AcquisitionConfig without_jig = AcquisitionConfig::without_jig();
  AugmentConfig augment;
  EncoderConfig encoder;
  TrainConfig train;
  int train_count = 120;
  std::uint64_t data_seed = 0;
};

struct AblationRow {
  double max_top1 = 0.0;
  double final_top1 = 0.0;
  Checkpoint checkpoint;  // encoder after the last epoch
};

struct AblationTable {
  AblationRow with_jig;
  AblationRow without_jig;

  std::string to_text() const;
};

// Trains and evaluates once per acquisition regime; everything else is shared.
AblationTable jig_ablation(const DatasetManifest& manifest, const AblationConfig& cfg,
                           const EpochCallback& on_epoch = {});
AblationRow run_regime(const DatasetManifest& manifest, const AcquisitionConfig& acquisition,
                       const AblationConfig& cfg, const EpochCallback& on_epoch = {});

// One user-study trial: the person's five closest board samples (best first)
// and the model's ordering of the whole board.
struct SimilarityTrial {
  std::string query_sample_id;
  std::vector<std::string> human_top5;
  std::vector<std::string> model_ranking;

  void validate() const;
  bool operator==(const SimilarityTrial&) const = default;
};

// Fraction of trials whose human first choice is within the model's top K.
double topk_accuracy(const std::vector<SimilarityTrial>& trials, int k);

double random_baseline(int k, int board_size = kBoardSize);

// Human ranks 1..5 against the ranks of the same five items in the model ordering.
double spearman_rho(const SimilarityTrial& trial);

enum class Alternative { TwoSided, Greater, Less };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// One-sample Student t-test of mean(values) against zero.
TTestResult t_test_vs_zero(const std::vector<double>& values, Alternative alternative = Alternative::TwoSided);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// P(T > t) for Student t with df degrees of freedom.
double student_t_sf(double t, double df);

// "Human" top-5 picks as noisy re-rankings of the board by true latent distance.
// noise is in units of the board's distance spread; infinity gives a uniform shuffle.
std::vector<SimilarityTrial> generate_synthetic_trials(const LatentIndex& index, const RollerConfig& roller,
                                                       double noise, int n_trials, std::uint64_t seed);

struct EvalReport {
  // Held-out kNN accuracies of the encoder, when a training run is attached.
  std::optional<double> max_top1;
  std::optional<double> final_top1;
  std::map<int, double> topk_curve;
  std::vector<double> spearman_rhos;
  double t_statistic = 0.0;
  double p_value = 1.0;

  std::string to_json() const;
  std::string to_table() const;
};

// Top-K curve for K = 1..16, per-trial rho and the t-test.
EvalReport evaluate_trials(const std::vector<SimilarityTrial>& trials, Alternative alternative = Alternative::TwoSided);

// Top-K accuracy against the random-choice line.
std::string topk_curve_svg(const std::map<int, double>& curve, int board_size = kBoardSize);

// JSON lines, one trial per line.
std::string write_trials_jsonl(const std::vector<SimilarityTrial>& trials);
std::vector<SimilarityTrial> read_trials_jsonl(const std::string& text);

}  // namespace telextiles
