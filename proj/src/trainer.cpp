#include "telextiles/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "telextiles/contrastive.hpp"
#include "telextiles/errors.hpp"
#include "telextiles/evaluation.hpp"

namespace telextiles {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !(momentum >= 0.0) || !(weight_decay >= 0.0))
    throw ValidationError("optimizer settings must be positive");
  if (epochs < 1 || batch_size < 1) throw ValidationError("epochs and batch_size must be positive");
  if (queue_size < batch_size) throw ValidationError("queue_size must be >= batch_size");
  if (!(key_momentum > 0.0 && key_momentum < 1.0)) throw ValidationError("key_momentum must be in (0,1)");
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  if (knn_k < 1) throw ValidationError("knn_k must be positive");
}

std::pair<LabeledFrames, LabeledFrames> split_dataset(const Dataset& dataset, int train_count) {
  LabeledFrames train_set, heldout;
  for (const auto& session : dataset.frames) {
    auto [train_part, test_part] = split_session(session, train_count);
    for (const auto& f : train_part) train_set.add(f);
    for (const auto& f : test_part) heldout.add(f);
  }
  return {std::move(train_set), std::move(heldout)};
}

TrainResult train(const LabeledFrames& train_set, const LabeledFrames& heldout, const AugmentConfig& augment,
                  const EncoderConfig& encoder_cfg, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  augment.validate();
  if (train_set.size() == 0) throw ValidationError("training set is empty");
  if (encoder_cfg.input_height != augment.crop_size || encoder_cfg.input_width != augment.crop_size)
    throw ValidationError("encoder input must match the augmentation crop size");

  Encoder query(encoder_cfg, cfg.seed);
  std::vector<float> key_params(query.params().begin(), query.params().end());
  const EncoderLayout& layout = query.layout();
  const std::size_t dim = layout.embedding_dim();
  const SgdConfig sgd{cfg.learning_rate, cfg.momentum, cfg.weight_decay};
  Rng rng(cfg.seed ^ 0x6d6f636fULL);

  // Warm start: fill the queue with keys of the initial key encoder.
  KeyQueue queue(cfg.queue_size, dim);
  std::vector<float> key(dim);
  {
    std::uniform_int_distribution<std::size_t> pick(0, train_set.size() - 1);
    while (queue.size() < queue.capacity()) {
      const auto view = augment_view(train_set.images[pick(rng)], augment, rng);
      network_forward<float>(layout, key_params, to_planar(view), key, nullptr);
      queue.enqueue(key);
    }
  }

  std::vector<float> grads(layout.parameter_count());
  std::vector<float> velocity(layout.parameter_count(), 0.0f);
  std::vector<float> query_emb(dim), grad_emb(dim);
  ForwardCache<float> cache;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grads.begin(), grads.end(), 0.0f);
      std::vector<std::vector<float>> batch_keys;
      for (std::size_t b = start; b < end; ++b) {
        const auto [view_q, view_k] = make_positive_pair(train_set.images[order[b]], augment, rng);
        network_forward<float>(layout, query.params(), to_planar(view_q), query_emb, &cache);
        network_forward<float>(layout, key_params, to_planar(view_k), key, nullptr);
        const auto nce = info_nce_loss(query_emb, key, queue.storage(), cfg.temperature);
        if (!std::isfinite(nce.loss))
          throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                                 std::to_string(b));
        loss_sum += nce.loss;
        const double scale = 1.0 / static_cast<double>(end - start);
        for (std::size_t d = 0; d < dim; ++d) grad_emb[d] = static_cast<float>(nce.grad_query[d] * scale);
        network_backward<float>(layout, query.params(), cache, grad_emb, grads);
        batch_keys.push_back(key);
      }
      sgd_step(query.params(), grads, velocity, sgd);
      momentum_update(key_params, query.params(), cfg.key_momentum);
      for (const auto& k : batch_keys) queue.enqueue(k);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(record.mean_loss))
      throw TrainingDiverged("non-finite mean loss at epoch " + std::to_string(epoch));
    record.knn_top1 = heldout.size() > 0 ? knn_accuracy(query, augment, train_set, heldout, cfg.knn_k) : 0.0;
    result.history.push_back(record);
    result.max_top1 = std::max(result.max_top1, record.knn_top1);
    result.final_top1 = record.knn_top1;
    if (on_epoch) on_epoch(record);
  }

  Checkpoint& ck = result.checkpoint;
  ck.encoder = encoder_cfg;
  ck.crop_size = augment.crop_size;
  ck.normalize_mean = augment.normalize_mean;
  ck.normalize_std = augment.normalize_std;
  ck.params.assign(query.params().begin(), query.params().end());
  ck.meta.epoch = cfg.epochs;
  ck.meta.seed = cfg.seed;
  for (const auto& r : result.history) ck.meta.loss_history.push_back(r.mean_loss);
  return result;
}

TrainResult train(const Dataset& dataset, int train_count, const AugmentConfig& augment,
                  const EncoderConfig& encoder, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (dataset.frames.empty()) throw ValidationError("dataset is empty");
  const auto [train_set, heldout] = split_dataset(dataset, train_count);
  return train(train_set, heldout, augment, encoder, cfg, on_epoch);
}

}  // namespace telextiles
