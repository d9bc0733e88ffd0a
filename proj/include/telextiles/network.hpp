#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "telextiles/image.hpp"

namespace telextiles {

struct ConvStage {
  int out_channels = 16;
  int kernel = 3;
  int stride = 1;

  bool operator==(const ConvStage&) const = default;
};

// Plain convolutional backbone: conv+ReLU stages, 1x1 global average pool,
// linear head to the embedding dimension, L2 normalization.
struct EncoderConfig {
  int input_height = 56;
  int input_width = 56;
  int input_channels = 3;
  std::vector<ConvStage> stages = {{16, 3, 2}, {32, 3, 2}, {32, 3, 2}, {64, 3, 1}};
  int embedding_dim = 64;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// Shapes and parameter offsets derived from an EncoderConfig. Parameters live in
// one flat array: per stage weights [out][in][k][k] then bias [out]; head weights
// [D][C] then bias [D].
class EncoderLayout {
 public:
  struct Stage {
    int in_channels, out_channels, kernel, stride, pad;
    int in_h, in_w, out_h, out_w;
    std::size_t weight_offset, bias_offset;
  };

  explicit EncoderLayout(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  const std::vector<Stage>& stages() const { return stages_; }
  int feature_channels() const { return stages_.back().out_channels; }
  int embedding_dim() const { return config_.embedding_dim; }
  std::size_t head_weight_offset() const { return head_weight_offset_; }
  std::size_t head_bias_offset() const { return head_bias_offset_; }
  std::size_t parameter_count() const { return parameter_count_; }
  std::size_t input_size() const {
    return static_cast<std::size_t>(config_.input_channels) * config_.input_height * config_.input_width;
  }

  // Named parameter tensors as (offset, size), in storage order.
  struct Tensor {
    const char* kind;
    int stage;
    std::size_t offset, size;
  };
  std::vector<Tensor> tensors() const;

 private:
  EncoderConfig config_;
  std::vector<Stage> stages_;
  std::size_t head_weight_offset_ = 0;
  std::size_t head_bias_offset_ = 0;
  std::size_t parameter_count_ = 0;
};

// Activations kept by forward for the backward pass.
template <typename T>
struct ForwardCache {
  std::vector<std::vector<T>> columns;      // im2col per stage
  std::vector<std::vector<T>> activations;  // post-ReLU output per stage
  std::vector<T> pooled;
  std::vector<T> raw;  // head output before normalization
  T norm = 0;
};

// Planar (C x H x W) input to unit-norm embedding.
template <typename T>
void network_forward(const EncoderLayout& layout, std::span<const T> params, std::span<const T> input,
                     std::span<T> embedding, ForwardCache<T>* cache);

// Accumulates d(loss)/d(params) into grad_params given d(loss)/d(embedding).
template <typename T>
void network_backward(const EncoderLayout& layout, std::span<const T> params, const ForwardCache<T>& cache,
                      std::span<const T> grad_embedding, std::span<T> grad_params);

class Encoder {
 public:
  // He-normal conv weights, zero biases; deterministic in seed.
  Encoder(const EncoderConfig& config, std::uint64_t seed);
  Encoder(const EncoderConfig& config, std::vector<float> params);

  const EncoderConfig& config() const { return layout_.config(); }
  const EncoderLayout& layout() const { return layout_; }
  std::span<const float> params() const { return params_; }
  std::span<float> params() { return params_; }

  // Image must already be cropped/normalized to the input size.
  std::vector<float> embed(const Image& input) const;
  std::vector<std::vector<float>> embed_batch(std::span<const Image> inputs) const;

 private:
  EncoderLayout layout_;
  std::vector<float> params_;
};

}  // namespace telextiles
