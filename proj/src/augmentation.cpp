#include "telextiles/augmentation.hpp"

#include <cmath>
#include <numbers>

#include "telextiles/errors.hpp"

namespace telextiles {

void AugmentConfig::validate() const {
  if (crop_size < 1) throw ValidationError("crop_size must be positive");
  for (double p : {vertical_flip_prob, rotation_prob})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must be in [0,1]");
  if (!(rotation_min_deg < rotation_max_deg)) throw ValidationError("rotation range must be non-empty");
  for (float s : normalize_std)
    if (!(s > 0.0f)) throw ValidationError("normalize_std must be positive");
  if (hue_jitter || gaussian_blur || grayscale)
    throw ValidationError("hue jitter, gaussian blur and grayscale are not supported");
}

Image crop(const Image& frame, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || height < 1 || width < 1 || y0 + height > frame.height || x0 + width > frame.width)
    throw ValidationError("crop window outside the frame");
  Image out(height, width);
  for (int y = 0; y < height; ++y) {
    const float* src = &frame.data[frame.index(y0 + y, x0, 0)];
    std::copy(src, src + static_cast<std::size_t>(width) * Image::kChannels, &out.data[out.index(y, 0, 0)]);
  }
  return out;
}

Image center_crop(const Image& frame, int size) {
  if (size < 1 || size > frame.height || size > frame.width)
    throw ValidationError("crop size " + std::to_string(size) + " exceeds frame " + std::to_string(frame.height) +
                          "x" + std::to_string(frame.width));
  return crop(frame, (frame.height - size) / 2, (frame.width - size) / 2, size, size);
}

Image flip_vertical(const Image& frame) {
  Image out(frame.height, frame.width);
  const std::size_t row = static_cast<std::size_t>(frame.width) * Image::kChannels;
  for (int y = 0; y < frame.height; ++y) {
    const float* src = &frame.data[frame.index(frame.height - 1 - y, 0, 0)];
    std::copy(src, src + row, &out.data[out.index(y, 0, 0)]);
  }
  return out;
}

namespace {

Image rotate_quarter_turns(const Image& frame, int turns) {
  const int n = frame.height;  // square unless turns == 2
  Image out(frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      int sy = y, sx = x;
      switch (turns) {
        case 1: sy = x; sx = n - 1 - y; break;
        case 2: sy = frame.height - 1 - y; sx = frame.width - 1 - x; break;
        case 3: sy = n - 1 - x; sx = y; break;
        default: break;
      }
      for (int c = 0; c < Image::kChannels; ++c) out.at(y, x, c) = frame.at(sy, sx, c);
    }
  }
  return out;
}

Image rotate_bilinear(const Image& frame, double angle_deg) {
  const auto fill = frame.channel_mean();
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = (frame.width - 1) / 2.0;
  const double cy = (frame.height - 1) / 2.0;
  Image out(frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const double u = x - cx;
      const double v = y - cy;
      const double sx = cx + cs * u - sn * v;
      const double sy = cy + sn * u + cs * v;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double tx = sx - fx;
      const double ty = sy - fy;
      for (int c = 0; c < Image::kChannels; ++c) {
        auto sample = [&](int yy, int xx) -> double {
          if (yy < 0 || xx < 0 || yy >= frame.height || xx >= frame.width) return fill[c];
          return frame.at(yy, xx, c);
        };
        const double top = sample(y0, x0) * (1 - tx) + sample(y0, x0 + 1) * tx;
        const double bottom = sample(y0 + 1, x0) * (1 - tx) + sample(y0 + 1, x0 + 1) * tx;
        out.at(y, x, c) = static_cast<float>(top * (1 - ty) + bottom * ty);
      }
    }
  }
  return out;
}

}  // namespace

Image rotate(const Image& frame, double angle_deg) {
  if (!std::isfinite(angle_deg)) throw ValidationError("rotation angle must be finite");
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0) a += 360.0;
  if (a == 0.0) return frame;
  if (std::fmod(a, 90.0) == 0.0) {
    const int turns = static_cast<int>(a / 90.0);
    if (turns == 2 || frame.height == frame.width) return rotate_quarter_turns(frame, turns);
  }
  return rotate_bilinear(frame, a);
}

Image normalize(const Image& frame, const std::array<float, 3>& mean, const std::array<float, 3>& std) {
  for (float s : std)
    if (!(s > 0.0f)) throw ValidationError("normalize_std must be positive");
  Image out = frame;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const auto c = i % Image::kChannels;
    out.data[i] = (out.data[i] - mean[c]) / std[c];
  }
  return out;
}

Image denormalize(const Image& frame, const std::array<float, 3>& mean, const std::array<float, 3>& std) {
  Image out = frame;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const auto c = i % Image::kChannels;
    out.data[i] = out.data[i] * std[c] + mean[c];
  }
  return out;
}

Image prepare_for_inference(const Image& frame, const AugmentConfig& cfg) {
  return normalize(center_crop(frame, cfg.crop_size), cfg.normalize_mean, cfg.normalize_std);
}

Image augment_view(const Image& frame, const AugmentConfig& cfg, Rng& rng, ViewTrace* trace) {
  if (cfg.crop_size > frame.height || cfg.crop_size > frame.width)
    throw ValidationError("crop_size exceeds frame dimensions");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ViewTrace t;
  // Draw every variate unconditionally so the stream layout is config independent.
  const double rotate_draw = unit(rng);
  const double angle = cfg.rotation_min_deg + (cfg.rotation_max_deg - cfg.rotation_min_deg) * unit(rng);
  const double flip_draw = unit(rng);
  const int crop_y = std::uniform_int_distribution<int>(0, frame.height - cfg.crop_size)(rng);
  const int crop_x = std::uniform_int_distribution<int>(0, frame.width - cfg.crop_size)(rng);

  Image view = frame;
  if (rotate_draw < cfg.rotation_prob) {
    t.rotated = true;
    t.angle_deg = angle;
    view = rotate(view, angle);
  }
  if (flip_draw < cfg.vertical_flip_prob) {
    t.flipped = true;
    view = flip_vertical(view);
  }
  t.crop_y = crop_y;
  t.crop_x = crop_x;
  view = crop(view, crop_y, crop_x, cfg.crop_size, cfg.crop_size);
  if (trace) *trace = t;
  return normalize(view, cfg.normalize_mean, cfg.normalize_std);
}

std::pair<Image, Image> make_positive_pair(const Image& frame, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  Image a = augment_view(frame, cfg, rng);
  Image b = augment_view(frame, cfg, rng);
  return {std::move(a), std::move(b)};
}

}  // namespace telextiles
