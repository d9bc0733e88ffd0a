#include "telextiles/contrastive.hpp"

#include <algorithm>
#include <cmath>

#include "telextiles/errors.hpp"

namespace telextiles {

KeyQueue::KeyQueue(std::size_t capacity, std::size_t dim) : capacity_(capacity), dim_(dim) {
  if (capacity == 0 || dim == 0) throw ValidationError("queue capacity and dimension must be positive");
  data_.resize(capacity * dim);
}

void KeyQueue::enqueue(std::span<const float> key) {
  if (key.size() != dim_) throw ValidationError("key dimension mismatch");
  std::size_t slot;
  if (size_ < capacity_) {
    slot = size_++;
  } else {
    slot = head_;
    head_ = (head_ + 1) % capacity_;
  }
  std::copy(key.begin(), key.end(), data_.begin() + slot * dim_);
}

std::span<const float> KeyQueue::row(std::size_t i) const {
  if (i >= size_) throw ValidationError("queue row out of range");
  const std::size_t slot = size_ < capacity_ ? i : (head_ + i) % capacity_;
  return {data_.data() + slot * dim_, dim_};
}

InfoNceResult info_nce_loss(std::span<const float> query, std::span<const float> positive,
                            std::span<const float> negatives, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  const std::size_t dim = query.size();
  if (dim == 0 || positive.size() != dim) throw ValidationError("query/positive dimension mismatch");
  if (negatives.empty() || negatives.size() % dim != 0) throw ValidationError("negative queue empty or ragged");
  const std::size_t count = negatives.size() / dim;

  auto dot = [&](const float* v) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += static_cast<double>(query[d]) * v[d];
    return s;
  };
  std::vector<double> logits(count + 1);
  logits[0] = dot(positive.data()) / temperature;
  for (std::size_t j = 0; j < count; ++j) logits[j + 1] = dot(negatives.data() + j * dim) / temperature;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - peak);
    total += l;
  }
  InfoNceResult result;
  result.loss = std::log(total) + peak - (std::log(logits[0]) + peak);
  // d/dq = (sum_i p_i v_i - k+) / tau
  result.grad_query.assign(dim, 0.0);
  const double p0 = logits[0] / total;
  for (std::size_t d = 0; d < dim; ++d) result.grad_query[d] = (p0 - 1.0) * positive[d];
  for (std::size_t j = 0; j < count; ++j) {
    const double p = logits[j + 1] / total;
    const float* n = negatives.data() + j * dim;
    for (std::size_t d = 0; d < dim; ++d) result.grad_query[d] += p * n[d];
  }
  for (double& g : result.grad_query) g /= temperature;
  return result;
}

void sgd_step(std::span<float> params, std::span<const float> grads, std::span<float> velocity,
              const SgdConfig& cfg) {
  if (grads.size() != params.size() || velocity.size() != params.size())
    throw ValidationError("sgd_step: shape mismatch");
  const auto lr = static_cast<float>(cfg.learning_rate);
  const auto mu = static_cast<float>(cfg.momentum);
  const auto wd = static_cast<float>(cfg.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float g = grads[i] + wd * params[i];
    velocity[i] = mu * velocity[i] + g;
    params[i] -= lr * velocity[i];
  }
}

void momentum_update(std::span<float> key_params, std::span<const float> query_params, double m) {
  if (key_params.size() != query_params.size()) throw ValidationError("momentum_update: shape mismatch");
  if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("key momentum must be in [0,1]");
  const auto keep = static_cast<float>(m);
  const auto take = static_cast<float>(1.0 - m);
  for (std::size_t i = 0; i < key_params.size(); ++i) key_params[i] = keep * key_params[i] + take * query_params[i];
}

}  // namespace telextiles
