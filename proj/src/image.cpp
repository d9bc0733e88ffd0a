#include "telextiles/image.hpp"

#include "telextiles/errors.hpp"

namespace telextiles {

Image::Image(int h, int w, float fill) : height(h), width(w) {
  if (h < 0 || w < 0) throw ValidationError("image dimensions must be non-negative");
  data.assign(static_cast<std::size_t>(h) * w * kChannels, fill);
}

std::array<double, Image::kChannels> Image::channel_mean() const {
  std::array<double, kChannels> sum{};
  for (std::size_t i = 0; i < data.size(); ++i) sum[i % kChannels] += data[i];
  const double n = static_cast<double>(pixel_count());
  for (auto& s : sum) s = n > 0 ? s / n : 0.0;
  return sum;
}

double Image::mean() const {
  double sum = 0.0;
  for (float v : data) sum += v;
  return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

std::vector<float> to_planar(const Image& image) {
  const std::size_t plane = image.pixel_count();
  std::vector<float> out(plane * Image::kChannels);
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < Image::kChannels; ++c) out[c * plane + p] = image.data[p * Image::kChannels + c];
  return out;
}

}  // namespace telextiles
