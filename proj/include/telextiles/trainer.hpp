#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "telextiles/augmentation.hpp"
#include "telextiles/checkpoint.hpp"
#include "telextiles/network.hpp"
#include "telextiles/tactile_data.hpp"

namespace telextiles {

struct TrainConfig {
  double learning_rate = 0.03;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int epochs = 40;
  int batch_size = 32;
  int queue_size = 1024;
  double key_momentum = 0.999;
  double temperature = 0.07;
  std::uint64_t seed = 0;
  int knn_k = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct LabeledFrames {
  std::vector<Image> images;
  std::vector<std::string> labels;

  void add(const TactileFrame& frame) {
    images.push_back(frame.pixels);
    labels.push_back(frame.sample_id);
  }
  std::size_t size() const { return images.size(); }
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double knn_top1 = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
  double max_top1 = 0.0;    // best held-out k-NN accuracy over epochs
  double final_top1 = 0.0;  // held-out k-NN accuracy after the last epoch
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// MoCo-style training: query encoder trained by SGD on InfoNCE against a FIFO
// queue of keys from a momentum-averaged key encoder. Held-out k-NN accuracy
// is measured after every epoch.
TrainResult train(const LabeledFrames& train_set, const LabeledFrames& heldout, const AugmentConfig& augment,
                  const EncoderConfig& encoder, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Splits every session into its first train_count frames and the rest.
std::pair<LabeledFrames, LabeledFrames> split_dataset(const Dataset& dataset, int train_count);

TrainResult train(const Dataset& dataset, int train_count, const AugmentConfig& augment,
                  const EncoderConfig& encoder, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace telextiles
