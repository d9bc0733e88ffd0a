#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace telextiles {

// FIFO of key embeddings used as negatives. Holds at most `capacity` rows;
// pushing beyond that evicts the oldest row.
class KeyQueue {
 public:
  KeyQueue(std::size_t capacity, std::size_t dim);

  void enqueue(std::span<const float> key);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return size_ == 0; }

  // i = 0 is the oldest row.
  std::span<const float> row(std::size_t i) const;
  // Rows in storage order (not age order); the loss is order-free.
  std::span<const float> storage() const { return {data_.data(), size_ * dim_}; }

 private:
  std::size_t capacity_;
  std::size_t dim_;
  std::size_t head_ = 0;  // slot of the oldest row once full
  std::size_t size_ = 0;
  std::vector<float> data_;
};

struct InfoNceResult {
  double loss = 0.0;
  std::vector<double> grad_query;
};

// -log softmax of the positive logit among {q.k+/tau} and {q.n/tau} for every
// negative row n. `negatives` is row-major with rows of size q.size().
InfoNceResult info_nce_loss(std::span<const float> query, std::span<const float> positive,
                            std::span<const float> negatives, double temperature);

struct SgdConfig {
  double learning_rate = 0.03;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

// g = grad + wd * param; v = momentum * v + g; param -= lr * v.
void sgd_step(std::span<float> params, std::span<const float> grads, std::span<float> velocity,
              const SgdConfig& cfg);

// key = m * key + (1 - m) * query.
void momentum_update(std::span<float> key_params, std::span<const float> query_params, double m);

}  // namespace telextiles
