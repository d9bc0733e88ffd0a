#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "telextiles/image.hpp"

namespace telextiles {

struct TactileFrame {
  std::string sample_id;
  int frame_index = 0;
  Image pixels;

  bool operator==(const TactileFrame&) const = default;
};

// Procedural stand-in for one physical textile.
struct TextureSpec {
  int weave_period_u = 8;  // pixels per weave repeat, horizontal
  int weave_period_v = 8;
  double yarn_thickness = 0.6;  // fraction of the half-repeat covered by a yarn
  double fuzz_amplitude = 0.2;
  double stiffness_relief = 0.7;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool operator==(const TextureSpec&) const = default;
};

struct AcquisitionConfig {
  bool jig = true;
  int frames_per_sample = 150;
  double frame_rate = 60.0;
  double duration = 2.5;
  double pressure_jitter = 0.02;
  double tilt_jitter = 0.01;
  double position_jitter = 0.5;  // pixels
  double rotation_jitter = 1.0;  // degrees
  int frame_height = 64;
  int frame_width = 64;

  static AcquisitionConfig with_jig();
  static AcquisitionConfig without_jig();

  void validate() const;
  bool operator==(const AcquisitionConfig&) const = default;
};

struct SampleEntry {
  std::string id;
  TextureSpec texture;
  std::string display_name;

  bool operator==(const SampleEntry&) const = default;
};

struct SessionEntry {
  std::string id;
  std::string sample_id;
  std::string participant_id;
  bool jig = true;
  int frame_count = 0;

  bool operator==(const SessionEntry&) const = default;
};

struct DatasetManifest {
  std::vector<SampleEntry> samples;
  std::vector<SessionEntry> sessions;
  int frame_height = 0;
  int frame_width = 0;

  void validate() const;
  const SampleEntry& sample(const std::string& id) const;
  bool operator==(const DatasetManifest&) const = default;
};

// Frames of session i live in frames[i].
struct Dataset {
  DatasetManifest manifest;
  std::vector<std::vector<TactileFrame>> frames;
};

enum class FrameStorage { Png, RawTensor };

// Height of the procedural surface at a real-valued position; in [0, 1].
double surface_height(const TextureSpec& spec, double x, double y);

HeightMap generate_sample_surface(const TextureSpec& spec, int height = 128, int width = 128);

std::vector<TactileFrame> simulate_acquisition(const std::string& sample_id, const TextureSpec& spec,
                                               const AcquisitionConfig& cfg, std::uint64_t seed);

// Spread-out texture specs for a synthetic sample book; ids are "s000", "s001", ...
DatasetManifest make_synthetic_manifest(int sample_count, std::uint64_t seed);

// One session per sample of the manifest, acquired under cfg.
Dataset synthesize_dataset(DatasetManifest manifest, const AcquisitionConfig& cfg, std::uint64_t seed,
                           const std::string& participant_id = "p00");

void save_dataset(const Dataset& dataset, const std::filesystem::path& root, FrameStorage storage);
Dataset load_dataset(const std::filesystem::path& root);

std::pair<std::vector<TactileFrame>, std::vector<TactileFrame>> split_session(
    const std::vector<TactileFrame>& frames, int train_count);

}  // namespace telextiles
