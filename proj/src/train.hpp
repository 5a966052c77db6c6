#pragma once

#include <cstdint>
#include <vector>

#include "loss.hpp"
#include "net.hpp"
#include "types.hpp"

namespace siatext {

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
  uint32_t batch_size = 32;
  uint32_t epochs = 1;
  float learning_rate = 1e-3f;
  OptimizerKind optimizer = OptimizerKind::adam;
  float adam_beta1 = 0.9f;
  float adam_beta2 = 0.999f;
  float adam_epsilon = 1e-8f;
  float clip_norm = 5.0f;  // global-norm clip; <= 0 disables
  uint64_t seed = 0;
  LossConfig loss;
  uint32_t threads = 1;  // 1 = bitwise-deterministic reduction order
};

struct TrainReport {
  std::vector<double> epoch_sum_loss;
  std::vector<double> epoch_mean_loss;  // sum / pairs per epoch
  std::vector<double> epoch_seconds;
  uint64_t param_checksum = 0;
};

// Minibatch loop over the pair dataset: seeded epoch shuffle, forward both
// branches of each pair, accumulate shared gradients, clip, optimizer step.
// Deterministic end-to-end given the seed when threads == 1. Aborts with a
// numeric error on the first non-finite loss or parameter.
TrainReport train(Params<float>& params, const PairDataset& dataset, const TrainConfig& cfg);

// FNV-1a over the raw bytes of every parameter array in declared order.
uint64_t params_checksum(const Params<float>& params);

}  // namespace siatext
