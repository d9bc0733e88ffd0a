#pragma once

#include <array>
#include <random>
#include <utility>

#include "telextiles/image.hpp"

namespace telextiles {

using Rng = std::mt19937_64;

// Per-channel statistics of DIGIT captures.
inline constexpr std::array<float, 3> kDigitMean = {0.37932363f, 0.4131034f, 0.38336082f};
inline constexpr std::array<float, 3> kDigitStd = {0.11476628f, 0.08604312f, 0.16590593f};

struct AugmentConfig {
  int crop_size = 56;
  double vertical_flip_prob = 0.5;
  double rotation_prob = 1.0;
  double rotation_min_deg = -180.0;  // half-open range [min, max)
  double rotation_max_deg = 180.0;
  std::array<float, 3> normalize_mean = kDigitMean;
  std::array<float, 3> normalize_std = kDigitStd;
  // Photometric augmentations are not part of the recipe; enabling one is rejected.
  bool hue_jitter = false;
  bool gaussian_blur = false;
  bool grayscale = false;

  void validate() const;
  bool operator==(const AugmentConfig&) const = default;
};

// What one call to augment_view did, for inspection in tests.
struct ViewTrace {
  bool rotated = false;
  double angle_deg = 0.0;
  bool flipped = false;
  int crop_y = 0;
  int crop_x = 0;
};

Image crop(const Image& frame, int y0, int x0, int height, int width);
Image center_crop(const Image& frame, int size);
Image flip_vertical(const Image& frame);

// Counter-clockwise rotation about the image center. Multiples of 90 degrees are
// exact pixel permutations (square frames; 180 for any shape); other angles use
// bilinear sampling with the per-channel mean outside the source support.
Image rotate(const Image& frame, double angle_deg);

Image normalize(const Image& frame, const std::array<float, 3>& mean, const std::array<float, 3>& std);
Image denormalize(const Image& frame, const std::array<float, 3>& mean, const std::array<float, 3>& std);

// Inference path: center crop, then normalize.
Image prepare_for_inference(const Image& frame, const AugmentConfig& cfg);

Image augment_view(const Image& frame, const AugmentConfig& cfg, Rng& rng, ViewTrace* trace = nullptr);
std::pair<Image, Image> make_positive_pair(const Image& frame, const AugmentConfig& cfg, Rng& rng);

}  // namespace telextiles
