#pragma once

#include <cstdint>
#include <vector>

#include "scanleak/nn/model.hpp"

namespace scanleak::nn {

// Adam with the usual defaults. Learning rates used by the canonical
// architectures: 1e-3 for the dense classifier, 1e-2 for the convolutional
// one.
struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean cross-entropy per epoch
};

// Minibatch Adam on (X, y). X is {N, ...per-sample shape}; labels are class
// indices. Batches are reshuffled each epoch from the config seed, so a
// fixed (model init, config) pair reproduces the loss history bit-for-bit.
TrainResult train(Model& model, const Tensor& x, const std::vector<int>& y,
                  const TrainConfig& cfg);

// Fraction of labels predicted correctly (eval mode).
double accuracy(const Model& model, const Tensor& x, const std::vector<int>& y);

}  // namespace scanleak::nn
