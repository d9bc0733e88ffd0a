#include "telextiles/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "telextiles/errors.hpp"

namespace telextiles {

void EncoderConfig::validate() const {
  if (input_height < 1 || input_width < 1 || input_channels < 1) throw ValidationError("bad encoder input shape");
  if (stages.empty()) throw ValidationError("encoder needs at least one conv stage");
  if (embedding_dim < 2) throw ValidationError("embedding_dim must be >= 2");
  for (const auto& s : stages)
    if (s.out_channels < 1 || s.kernel < 1 || s.stride < 1) throw ValidationError("bad conv stage");
}

EncoderLayout::EncoderLayout(const EncoderConfig& config) : config_(config) {
  config_.validate();
  int c = config_.input_channels, h = config_.input_height, w = config_.input_width;
  std::size_t offset = 0;
  for (const auto& s : config_.stages) {
    Stage st{};
    st.in_channels = c;
    st.out_channels = s.out_channels;
    st.kernel = s.kernel;
    st.stride = s.stride;
    st.pad = s.kernel / 2;
    st.in_h = h;
    st.in_w = w;
    st.out_h = (h + 2 * st.pad - s.kernel) / s.stride + 1;
    st.out_w = (w + 2 * st.pad - s.kernel) / s.stride + 1;
    if (st.out_h < 1 || st.out_w < 1) throw ValidationError("conv stages shrink the input to nothing");
    st.weight_offset = offset;
    offset += static_cast<std::size_t>(s.out_channels) * c * s.kernel * s.kernel;
    st.bias_offset = offset;
    offset += s.out_channels;
    stages_.push_back(st);
    c = st.out_channels;
    h = st.out_h;
    w = st.out_w;
  }
  head_weight_offset_ = offset;
  offset += static_cast<std::size_t>(config_.embedding_dim) * c;
  head_bias_offset_ = offset;
  offset += config_.embedding_dim;
  parameter_count_ = offset;
}

std::vector<EncoderLayout::Tensor> EncoderLayout::tensors() const {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const auto& s = stages_[i];
    out.push_back({"conv_weight", static_cast<int>(i), s.weight_offset, s.bias_offset - s.weight_offset});
    out.push_back({"conv_bias", static_cast<int>(i), s.bias_offset, static_cast<std::size_t>(s.out_channels)});
  }
  const int last = static_cast<int>(stages_.size());
  out.push_back({"head_weight", last, head_weight_offset_, head_bias_offset_ - head_weight_offset_});
  out.push_back({"head_bias", last, head_bias_offset_, static_cast<std::size_t>(config_.embedding_dim)});
  return out;
}

namespace {

template <typename T>
void im2col(const EncoderLayout::Stage& s, const T* input, std::vector<T>& cols) {
  const int k = s.kernel;
  const std::size_t plane = static_cast<std::size_t>(s.out_h) * s.out_w;
  cols.assign(static_cast<std::size_t>(s.in_channels) * k * k * plane, T(0));
  for (int ci = 0; ci < s.in_channels; ++ci) {
    const T* src = input + static_cast<std::size_t>(ci) * s.in_h * s.in_w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < s.out_h; ++oy) {
          const int iy = oy * s.stride - s.pad + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int ox = 0; ox < s.out_w; ++ox) {
            const int ix = ox * s.stride - s.pad + kx;
            if (ix >= 0 && ix < s.in_w) dst[oy * s.out_w + ox] = src[iy * s.in_w + ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const EncoderLayout::Stage& s, const std::vector<T>& cols, T* grad_input) {
  const int k = s.kernel;
  const std::size_t plane = static_cast<std::size_t>(s.out_h) * s.out_w;
  std::fill(grad_input, grad_input + static_cast<std::size_t>(s.in_channels) * s.in_h * s.in_w, T(0));
  for (int ci = 0; ci < s.in_channels; ++ci) {
    T* dst = grad_input + static_cast<std::size_t>(ci) * s.in_h * s.in_w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < s.out_h; ++oy) {
          const int iy = oy * s.stride - s.pad + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int ox = 0; ox < s.out_w; ++ox) {
            const int ix = ox * s.stride - s.pad + kx;
            if (ix >= 0 && ix < s.in_w) dst[iy * s.in_w + ix] += src[oy * s.out_w + ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void network_forward(const EncoderLayout& layout, std::span<const T> params, std::span<const T> input,
                     std::span<T> embedding, ForwardCache<T>* cache) {
  if (params.size() != layout.parameter_count()) throw ValidationError("parameter count mismatch");
  if (input.size() != layout.input_size()) throw ValidationError("encoder input shape mismatch");
  if (embedding.size() != static_cast<std::size_t>(layout.embedding_dim()))
    throw ValidationError("embedding buffer has wrong dimension");

  const auto& stages = layout.stages();
  ForwardCache<T> local;
  ForwardCache<T>& c = cache ? *cache : local;
  c.columns.resize(stages.size());
  c.activations.resize(stages.size());

  const T* x = input.data();
  for (std::size_t si = 0; si < stages.size(); ++si) {
    const auto& s = stages[si];
    auto& cols = c.columns[si];
    im2col(s, x, cols);
    const std::size_t plane = static_cast<std::size_t>(s.out_h) * s.out_w;
    const std::size_t rows = static_cast<std::size_t>(s.in_channels) * s.kernel * s.kernel;
    auto& out = c.activations[si];
    out.resize(static_cast<std::size_t>(s.out_channels) * plane);
    const T* weights = params.data() + s.weight_offset;
    const T* bias = params.data() + s.bias_offset;
    for (int o = 0; o < s.out_channels; ++o) {
      T* dst = out.data() + o * plane;
      std::fill(dst, dst + plane, bias[o]);
      const T* wrow = weights + o * rows;
      for (std::size_t r = 0; r < rows; ++r) {
        const T w = wrow[r];
        const T* col = cols.data() + r * plane;
        for (std::size_t p = 0; p < plane; ++p) dst[p] += w * col[p];
      }
      for (std::size_t p = 0; p < plane; ++p) dst[p] = std::max(dst[p], T(0));
    }
    x = out.data();
  }

  const auto& last = stages.back();
  const std::size_t plane = static_cast<std::size_t>(last.out_h) * last.out_w;
  const int channels = last.out_channels;
  c.pooled.assign(channels, T(0));
  for (int ch = 0; ch < channels; ++ch) {
    T sum = 0;
    for (std::size_t p = 0; p < plane; ++p) sum += x[ch * plane + p];
    c.pooled[ch] = sum / static_cast<T>(plane);
  }

  const int dim = layout.embedding_dim();
  const T* hw = params.data() + layout.head_weight_offset();
  const T* hb = params.data() + layout.head_bias_offset();
  c.raw.assign(dim, T(0));
  T sq = 0;
  for (int d = 0; d < dim; ++d) {
    T v = hb[d];
    for (int ch = 0; ch < channels; ++ch) v += hw[d * channels + ch] * c.pooled[ch];
    c.raw[d] = v;
    sq += v * v;
  }
  c.norm = std::max(std::sqrt(sq), T(1e-12));
  for (int d = 0; d < dim; ++d) embedding[d] = c.raw[d] / c.norm;
}

template <typename T>
void network_backward(const EncoderLayout& layout, std::span<const T> params, const ForwardCache<T>& cache,
                      std::span<const T> grad_embedding, std::span<T> grad_params) {
  if (grad_params.size() != layout.parameter_count()) throw ValidationError("gradient buffer size mismatch");
  const auto& stages = layout.stages();
  const int dim = layout.embedding_dim();
  const int channels = layout.feature_channels();

  // Through y = raw / |raw|.
  std::vector<T> grad_raw(dim);
  T dot = 0;
  for (int d = 0; d < dim; ++d) dot += cache.raw[d] / cache.norm * grad_embedding[d];
  for (int d = 0; d < dim; ++d) grad_raw[d] = (grad_embedding[d] - cache.raw[d] / cache.norm * dot) / cache.norm;

  const T* hw = params.data() + layout.head_weight_offset();
  T* ghw = grad_params.data() + layout.head_weight_offset();
  T* ghb = grad_params.data() + layout.head_bias_offset();
  std::vector<T> grad_pooled(channels, T(0));
  for (int d = 0; d < dim; ++d) {
    ghb[d] += grad_raw[d];
    for (int ch = 0; ch < channels; ++ch) {
      ghw[d * channels + ch] += grad_raw[d] * cache.pooled[ch];
      grad_pooled[ch] += hw[d * channels + ch] * grad_raw[d];
    }
  }

  const auto& last = stages.back();
  std::size_t plane = static_cast<std::size_t>(last.out_h) * last.out_w;
  std::vector<T> grad_act(static_cast<std::size_t>(channels) * plane);
  for (int ch = 0; ch < channels; ++ch)
    std::fill(grad_act.begin() + ch * plane, grad_act.begin() + (ch + 1) * plane,
              grad_pooled[ch] / static_cast<T>(plane));

  std::vector<T> grad_cols;
  std::vector<T> grad_input;
  for (std::size_t si = stages.size(); si-- > 0;) {
    const auto& s = stages[si];
    plane = static_cast<std::size_t>(s.out_h) * s.out_w;
    const std::size_t rows = static_cast<std::size_t>(s.in_channels) * s.kernel * s.kernel;
    const auto& act = cache.activations[si];
    const auto& cols = cache.columns[si];
    for (std::size_t i = 0; i < grad_act.size(); ++i)
      if (act[i] <= T(0)) grad_act[i] = T(0);

    const T* weights = params.data() + s.weight_offset;
    T* gw = grad_params.data() + s.weight_offset;
    T* gb = grad_params.data() + s.bias_offset;
    const bool need_input_grad = si > 0;
    if (need_input_grad) grad_cols.assign(rows * plane, T(0));
    for (int o = 0; o < s.out_channels; ++o) {
      const T* g = grad_act.data() + o * plane;
      T bsum = 0;
      for (std::size_t p = 0; p < plane; ++p) bsum += g[p];
      gb[o] += bsum;
      for (std::size_t r = 0; r < rows; ++r) {
        const T* col = cols.data() + r * plane;
        T acc = 0;
        for (std::size_t p = 0; p < plane; ++p) acc += g[p] * col[p];
        gw[o * rows + r] += acc;
        if (need_input_grad) {
          const T w = weights[o * rows + r];
          T* gc = grad_cols.data() + r * plane;
          for (std::size_t p = 0; p < plane; ++p) gc[p] += w * g[p];
        }
      }
    }
    if (need_input_grad) {
      grad_input.resize(static_cast<std::size_t>(s.in_channels) * s.in_h * s.in_w);
      col2im(s, grad_cols, grad_input.data());
      grad_act.swap(grad_input);
    }
  }
}

template void network_forward<float>(const EncoderLayout&, std::span<const float>, std::span<const float>,
                                     std::span<float>, ForwardCache<float>*);
template void network_forward<double>(const EncoderLayout&, std::span<const double>, std::span<const double>,
                                      std::span<double>, ForwardCache<double>*);
template void network_backward<float>(const EncoderLayout&, std::span<const float>, const ForwardCache<float>&,
                                      std::span<const float>, std::span<float>);
template void network_backward<double>(const EncoderLayout&, std::span<const double>, const ForwardCache<double>&,
                                       std::span<const double>, std::span<double>);

Encoder::Encoder(const EncoderConfig& config, std::uint64_t seed) : layout_(config) {
  params_.assign(layout_.parameter_count(), 0.0f);
  std::mt19937_64 rng(seed);
  for (const auto& s : layout_.stages()) {
    const double fan_in = static_cast<double>(s.in_channels) * s.kernel * s.kernel;
    std::normal_distribution<float> dist(0.0f, static_cast<float>(std::sqrt(2.0 / fan_in)));
    for (std::size_t i = s.weight_offset; i < s.bias_offset; ++i) params_[i] = dist(rng);
  }
  std::normal_distribution<float> head(0.0f, static_cast<float>(std::sqrt(1.0 / layout_.feature_channels())));
  for (std::size_t i = layout_.head_weight_offset(); i < layout_.head_bias_offset(); ++i) params_[i] = head(rng);
}

Encoder::Encoder(const EncoderConfig& config, std::vector<float> params)
    : layout_(config), params_(std::move(params)) {
  if (params_.size() != layout_.parameter_count())
    throw ValidationError("expected " + std::to_string(layout_.parameter_count()) + " parameters, got " +
                          std::to_string(params_.size()));
}

std::vector<float> Encoder::embed(const Image& input) const {
  if (input.height != config().input_height || input.width != config().input_width)
    throw ValidationError("frame is " + std::to_string(input.height) + "x" + std::to_string(input.width) +
                          ", encoder expects " + std::to_string(config().input_height) + "x" +
                          std::to_string(config().input_width));
  const auto planar = to_planar(input);
  std::vector<float> out(layout_.embedding_dim());
  network_forward<float>(layout_, params_, planar, out, nullptr);
  return out;
}

std::vector<std::vector<float>> Encoder::embed_batch(std::span<const Image> inputs) const {
  std::vector<std::vector<float>> out;
  out.reserve(inputs.size());
  for (const auto& img : inputs) out.push_back(embed(img));
  return out;
}

}  // namespace telextiles
