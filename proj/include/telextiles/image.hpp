#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace telextiles {

// Three-channel float image stored row-major, channels interleaved (H x W x 3).
struct Image {
  static constexpr int kChannels = 3;

  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, float fill = 0.0f);

  float& at(int y, int x, int c) { return data[index(y, x, c)]; }
  float at(int y, int x, int c) const { return data[index(y, x, c)]; }

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * kChannels + c;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
  bool empty() const { return data.empty(); }

  std::array<double, kChannels> channel_mean() const;
  double mean() const;

  bool operator==(const Image&) const = default;
};

// Single-channel grid, e.g. a surface height map.
struct HeightMap {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  HeightMap() = default;
  HeightMap(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w, 0.0f) {}

  float& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const HeightMap&) const = default;
};

// Planar copy (C x H x W) for the network input.
std::vector<float> to_planar(const Image& image);

}  // namespace telextiles
