#include "telextiles/tactile_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "telextiles/errors.hpp"

namespace telextiles {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x632be59bd9b4e019ULL +
                                                 static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise on a lattice of the given cell size; in [0, 1).
double value_noise(std::uint64_t seed, double x, double y, double cell) {
  const double gx = x / cell;
  const double gy = y / cell;
  const double fx = std::floor(gx);
  const double fy = std::floor(gy);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = smooth(gx - fx);
  const double ty = smooth(gy - fy);
  const double v00 = lattice_value(seed, ix, iy);
  const double v10 = lattice_value(seed, ix + 1, iy);
  const double v01 = lattice_value(seed, ix, iy + 1);
  const double v11 = lattice_value(seed, ix + 1, iy + 1);
  return (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
}

// Position inside one repeat, in [0, 1). fmod is exact, so integer shifts by the
// period reproduce the same value bit for bit.
double phase(double x, int period) {
  double m = std::fmod(x, static_cast<double>(period));
  if (m < 0) m += period;
  return m / period;
}

// Plain weave: two warp and two weft yarns per repeat, alternating over/under.
double weave_height(double tu, double tv, double thickness) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double radius = thickness * 0.25;
  auto profile = [radius](double t, double center) {
    double d = std::abs(t - center);
    d = std::min(d, 1.0 - d);
    const double r = d / radius;
    return r >= 1.0 ? 0.0 : std::sqrt(1.0 - r * r);
  };
  double h = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double center = 0.25 + 0.5 * i;
    const double warp_lift = 0.5 + 0.5 * std::cos(kTwoPi * (tv - center));
    h = std::max(h, profile(tu, center) * (0.55 + 0.45 * warp_lift));
    const double weft_lift = 0.5 - 0.5 * std::cos(kTwoPi * (tu - center));
    h = std::max(h, profile(tv, center) * (0.55 + 0.45 * weft_lift));
  }
  return h;
}

struct Pose {
  double pressure = 0.5;
  double tilt_x = 0.0;
  double tilt_y = 0.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  double angle_deg = 0.0;
};

constexpr double kNominalPressure = 0.5;
constexpr std::array<double, 3> kGelBase = {0.36, 0.40, 0.37};
constexpr std::array<double, 3> kLightAzimuthDeg = {90.0, 210.0, 330.0};
constexpr double kLightElevationDeg = 40.0;
constexpr double kNormalGain = 2.0;
constexpr double kShadeGain = 0.55;
constexpr double kContactGlow = 0.08;
constexpr double kCameraNoise = 0.004;

float quantize8(double v) {
  const long k = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<float>(k) / 255.0f;
}

Image render_frame(const TextureSpec& spec, const Pose& pose, int height, int width, std::mt19937_64& rng) {
  const double rad = pose.angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  const double level = 1.0 - pose.pressure;

  HeightMap gel(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = x - cx;
      const double v = y - cy;
      const double sx = pose.offset_x + cs * u - sn * v;
      const double sy = pose.offset_y + sn * u + cs * v;
      const double h = surface_height(spec, sx, sy);
      const double contact = h - level + pose.tilt_x * u / width + pose.tilt_y * v / height;
      gel.at(y, x) = static_cast<float>(spec.stiffness_relief * std::max(0.0, contact));
    }
  }

  std::array<std::array<double, 3>, 3> lights{};
  const double el = kLightElevationDeg * std::numbers::pi / 180.0;
  for (int c = 0; c < 3; ++c) {
    const double az = kLightAzimuthDeg[c] * std::numbers::pi / 180.0;
    lights[c] = {std::cos(az) * std::cos(el), std::sin(az) * std::cos(el), std::sin(el)};
  }

  std::normal_distribution<double> noise(0.0, kCameraNoise);
  Image frame(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int xl = std::max(0, x - 1), xr = std::min(width - 1, x + 1);
      const int yu = std::max(0, y - 1), yd = std::min(height - 1, y + 1);
      const double gx = (gel.at(y, xr) - gel.at(y, xl)) / std::max(1, xr - xl);
      const double gy = (gel.at(yd, x) - gel.at(yu, x)) / std::max(1, yd - yu);
      double nx = -kNormalGain * gx, ny = -kNormalGain * gy, nz = 1.0;
      const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
      nx /= norm;
      ny /= norm;
      nz /= norm;
      for (int c = 0; c < 3; ++c) {
        const double shade = nx * lights[c][0] + ny * lights[c][1] + nz * lights[c][2] - lights[c][2];
        const double value = kGelBase[c] + kShadeGain * shade + kContactGlow * gel.at(y, x) + noise(rng);
        frame.at(y, x, c) = quantize8(value);
      }
    }
  }
  return frame;
}

// AR(1) step with stationary standard deviation sigma.
double drift(double current, double sigma, double rho, std::normal_distribution<double>& unit,
             std::mt19937_64& rng) {
  return rho * current + std::sqrt(1.0 - rho * rho) * sigma * unit(rng);
}

}  // namespace

void TextureSpec::validate() const {
  if (weave_period_u < 2 || weave_period_v < 2) throw ValidationError("weave periods must be >= 2 pixels");
  if (!(yarn_thickness > 0.0 && yarn_thickness < 1.0)) throw ValidationError("yarn_thickness must be in (0,1)");
  if (!(fuzz_amplitude >= 0.0 && fuzz_amplitude <= 1.0)) throw ValidationError("fuzz_amplitude must be in [0,1]");
  if (!(stiffness_relief >= 0.0 && stiffness_relief <= 1.0))
    throw ValidationError("stiffness_relief must be in [0,1]");
}

AcquisitionConfig AcquisitionConfig::with_jig() { return AcquisitionConfig{}; }

AcquisitionConfig AcquisitionConfig::without_jig() {
  AcquisitionConfig cfg;
  cfg.jig = false;
  cfg.pressure_jitter = 0.15;
  cfg.tilt_jitter = 0.6;
  cfg.position_jitter = 1.0;
  cfg.rotation_jitter = 8.0;
  return cfg;
}

void AcquisitionConfig::validate() const {
  if (frame_height < 8 || frame_width < 8) throw ValidationError("frames must be at least 8x8");
  if (!(frame_rate > 0.0) || !(duration > 0.0)) throw ValidationError("frame_rate and duration must be positive");
  if (frames_per_sample != static_cast<int>(std::lround(frame_rate * duration)))
    throw ValidationError("frames_per_sample must equal round(frame_rate * duration)");
  for (double j : {pressure_jitter, tilt_jitter, position_jitter, rotation_jitter})
    if (!(j >= 0.0) || !std::isfinite(j)) throw ValidationError("jitter scales must be finite and non-negative");
  if (jig) {
    const AcquisitionConfig loose = without_jig();
    if (pressure_jitter > loose.pressure_jitter || tilt_jitter > loose.tilt_jitter ||
        position_jitter > loose.position_jitter || rotation_jitter > loose.rotation_jitter)
      throw ValidationError("jig regime jitter must not exceed the hand-held regime");
  }
}

void DatasetManifest::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].texture.validate();
    for (std::size_t j = 0; j < i; ++j)
      if (samples[j].id == samples[i].id) throw ValidationError("duplicate sample id " + samples[i].id);
  }
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    const bool known = std::any_of(samples.begin(), samples.end(), [&](const auto& e) { return e.id == s.sample_id; });
    if (!known) throw ValidationError("session " + s.id + " references unknown sample " + s.sample_id);
    for (std::size_t j = 0; j < i; ++j)
      if (sessions[j].id == s.id) throw ValidationError("duplicate session id " + s.id);
  }
}

const SampleEntry& DatasetManifest::sample(const std::string& id) const {
  for (const auto& s : samples)
    if (s.id == id) return s;
  throw ValidationError("unknown sample " + id);
}

double surface_height(const TextureSpec& spec, double x, double y) {
  const auto ou = static_cast<double>(splitmix64(spec.rng_seed) % static_cast<std::uint64_t>(spec.weave_period_u));
  const auto ov =
      static_cast<double>(splitmix64(spec.rng_seed + 1) % static_cast<std::uint64_t>(spec.weave_period_v));
  const double weave = weave_height(phase(x + ou, spec.weave_period_u), phase(y + ov, spec.weave_period_v),
                                    spec.yarn_thickness);
  if (spec.fuzz_amplitude == 0.0) return weave;
  const std::uint64_t noise_seed = splitmix64(spec.rng_seed ^ 0xf0f0f0f0f0f0f0f0ULL);
  const double fuzz = 0.65 * value_noise(noise_seed, x, y, 2.5) + 0.35 * value_noise(noise_seed + 7, x, y, 1.2);
  return std::clamp((1.0 - spec.fuzz_amplitude) * weave + spec.fuzz_amplitude * fuzz, 0.0, 1.0);
}

HeightMap generate_sample_surface(const TextureSpec& spec, int height, int width) {
  spec.validate();
  if (height < 1 || width < 1) throw ValidationError("height map must be non-empty");
  HeightMap map(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) map.at(y, x) = static_cast<float>(surface_height(spec, x, y));
  return map;
}

std::vector<TactileFrame> simulate_acquisition(const std::string& sample_id, const TextureSpec& spec,
                                               const AcquisitionConfig& cfg, std::uint64_t seed) {
  spec.validate();
  cfg.validate();
  std::mt19937_64 rng(splitmix64(seed) ^ splitmix64(spec.rng_seed + 0x51ed));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> place(0.0, 4096.0);

  Pose base;
  base.offset_x = place(rng);
  base.offset_y = place(rng);
  if (!cfg.jig) {
    // Hand-held captures: some participants rotate the sensor by a quarter turn.
    base.angle_deg = 90.0 * std::uniform_int_distribution<int>(0, 3)(rng);
    base.pressure = kNominalPressure + cfg.pressure_jitter * unit(rng);
  }

  constexpr double kDriftCorrelation = 0.95;
  Pose wander;  // slow deviations for the hand-held regime
  std::vector<TactileFrame> frames;
  frames.reserve(cfg.frames_per_sample);
  for (int i = 0; i < cfg.frames_per_sample; ++i) {
    Pose pose = base;
    if (cfg.jig) {
      pose.pressure += cfg.pressure_jitter * unit(rng);
      pose.tilt_x = cfg.tilt_jitter * unit(rng);
      pose.tilt_y = cfg.tilt_jitter * unit(rng);
      pose.offset_x += cfg.position_jitter * unit(rng);
      pose.offset_y += cfg.position_jitter * unit(rng);
      pose.angle_deg += cfg.rotation_jitter * unit(rng);
    } else {
      wander.pressure = drift(wander.pressure, cfg.pressure_jitter, kDriftCorrelation, unit, rng);
      wander.tilt_x = drift(wander.tilt_x, cfg.tilt_jitter, kDriftCorrelation, unit, rng);
      wander.tilt_y = drift(wander.tilt_y, cfg.tilt_jitter, kDriftCorrelation, unit, rng);
      wander.angle_deg = drift(wander.angle_deg, cfg.rotation_jitter, kDriftCorrelation, unit, rng);
      // The sensor slides: position is a random walk.
      wander.offset_x += cfg.position_jitter * unit(rng);
      wander.offset_y += cfg.position_jitter * unit(rng);
      pose.pressure += wander.pressure;
      pose.tilt_x = wander.tilt_x;
      pose.tilt_y = wander.tilt_y;
      pose.angle_deg += wander.angle_deg;
      pose.offset_x += wander.offset_x;
      pose.offset_y += wander.offset_y;
    }
    pose.pressure = std::clamp(pose.pressure, 0.05, 0.95);
    frames.push_back({sample_id, i, render_frame(spec, pose, cfg.frame_height, cfg.frame_width, rng)});
  }
  return frames;
}

DatasetManifest make_synthetic_manifest(int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw ValidationError("sample_count must be positive");
  struct Combo {
    int period;
    double aspect, thickness, fuzz, stiffness;
  };
  std::vector<Combo> combos;
  for (int period : {4, 6, 9, 13})
    for (double aspect : {1.0, 1.5})
      for (double thickness : {0.45, 0.85})
        for (double fuzz : {0.05, 0.3})
          for (double stiffness : {0.5, 0.9}) combos.push_back({period, aspect, thickness, fuzz, stiffness});

  std::mt19937_64 rng(splitmix64(seed));
  std::shuffle(combos.begin(), combos.end(), rng);
  std::uniform_int_distribution<int> period(3, 16);
  std::uniform_real_distribution<double> fraction(0.3, 0.9);
  std::uniform_real_distribution<double> fuzz(0.0, 0.5);

  DatasetManifest manifest;
  for (int i = 0; i < sample_count; ++i) {
    TextureSpec spec;
    if (i < static_cast<int>(combos.size())) {
      const Combo& c = combos[i];
      spec.weave_period_u = c.period;
      spec.weave_period_v = static_cast<int>(std::lround(c.period * c.aspect));
      spec.yarn_thickness = c.thickness;
      spec.fuzz_amplitude = c.fuzz;
      spec.stiffness_relief = c.stiffness;
    } else {
      spec.weave_period_u = period(rng);
      spec.weave_period_v = period(rng);
      spec.yarn_thickness = fraction(rng);
      spec.fuzz_amplitude = fuzz(rng);
      spec.stiffness_relief = fraction(rng);
    }
    spec.rng_seed = splitmix64(seed + 1000003ULL * (i + 1));
    char id[16];
    std::snprintf(id, sizeof id, "s%03d", i);
    manifest.samples.push_back({id, spec, "Textile " + std::string(id + 1)});
  }
  return manifest;
}

Dataset synthesize_dataset(DatasetManifest manifest, const AcquisitionConfig& cfg, std::uint64_t seed,
                           const std::string& participant_id) {
  cfg.validate();
  Dataset dataset;
  manifest.frame_height = cfg.frame_height;
  manifest.frame_width = cfg.frame_width;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& sample = manifest.samples[i];
    SessionEntry session;
    session.id = sample.id + "_" + participant_id + (cfg.jig ? "_jig" : "_free");
    session.sample_id = sample.id;
    session.participant_id = participant_id;
    session.jig = cfg.jig;
    session.frame_count = cfg.frames_per_sample;
    manifest.sessions.push_back(session);
    dataset.frames.push_back(simulate_acquisition(sample.id, sample.texture, cfg, splitmix64(seed) + i));
  }
  dataset.manifest = std::move(manifest);
  return dataset;
}

std::pair<std::vector<TactileFrame>, std::vector<TactileFrame>> split_session(
    const std::vector<TactileFrame>& frames, int train_count) {
  if (train_count < 0 || train_count >= static_cast<int>(frames.size()))
    throw ValidationError("train_count must be smaller than the frame count");
  return {std::vector<TactileFrame>(frames.begin(), frames.begin() + train_count),
          std::vector<TactileFrame>(frames.begin() + train_count, frames.end())};
}

}  // namespace telextiles
