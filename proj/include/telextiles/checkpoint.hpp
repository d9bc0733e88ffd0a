#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "telextiles/augmentation.hpp"
#include "telextiles/network.hpp"

namespace telextiles {

struct TrainingMeta {
  int epoch = 0;
  std::vector<double> loss_history;
  std::uint64_t seed = 0;

  bool operator==(const TrainingMeta&) const = default;
};

// File layout: "TXE1", u32 version, u32 JSON length, JSON config block,
// u64 parameter count, little-endian f32 parameters.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  EncoderConfig encoder;
  // Inference preprocessing the encoder was trained with.
  int crop_size = 56;
  std::array<float, 3> normalize_mean = kDigitMean;
  std::array<float, 3> normalize_std = kDigitStd;
  std::vector<float> params;
  TrainingMeta meta;

  AugmentConfig inference_config() const;
  bool operator==(const Checkpoint&) const = default;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace telextiles
