/*
 * Copyright 2026 The Olens Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef OLENS_TRAINING_HPP_
#define OLENS_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "olens/network.hpp"
#include "olens/tape.hpp"
#include "olens/tensor.hpp"

namespace olens {

// One supervised item. Segmentation examples carry `mask` (same shape as the
// network output, values in {0,1}); classification examples carry `label`.
struct Example {
  Tensor input;
  Tensor mask;
  int label = -1;
};

enum class OptimizerKind { kSgd, kAdam };
enum class LossKind { kDice, kCrossEntropy };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  LossKind loss = LossKind::kDice;
  double smooth_eps = 1.0;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;

  // Throws InvalidArgument on out-of-range values.
  void Validate() const;
};

struct EpochReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_seconds = 0.0;
};

// 1 - (2 sum(pred*target) + eps) / (sum(pred) + sum(target) + eps).
Tensor DiceLoss(const Tensor& pred, const Tensor& target, double smooth_eps,
                Tape* tape = nullptr);

// -log(pred[target_class] + 1e-12) for a probability vector.
Tensor CrossEntropy(const Tensor& pred, int target_class, Tape* tape = nullptr);

// Per-parameter gradient buffers, parallel to Network::parameters().
using Gradients = std::vector<std::vector<double>>;

struct OptimizerState {
  std::size_t step = 0;
  Gradients first_moment;
  Gradients second_moment;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// Applies one update to the trainable parameters of `net`. Parameters of
// frozen layers are never written. Throws MissingGradient when a trainable
// parameter has no gradient buffer.
void OptimizerStep(Network& net, const Gradients& grads,
                   const TrainConfig& config, OptimizerState& state);

// Current grad slots of the network parameters (empty entries where absent).
Gradients CollectGradients(const Network& net);

// Deterministic train/validation split of `n` items: {train, val} indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SplitIndices(
    std::size_t n, double val_fraction, std::uint64_t seed);

using EpochCallback = std::function<void(const EpochReport&)>;

// Mini-batch training with dropout active; validation runs deterministically.
// The result is a pure function of (data, config, initial network); only
// wall_seconds varies between runs.
std::vector<EpochReport> Train(Network& net, std::span<const Example> data,
                               const TrainConfig& config,
                               const EpochCallback& on_epoch = {});

struct EvalResult {
  double mean_loss = 0.0;
  std::optional<double> accuracy;  // classification only
};

EvalResult Evaluate(const Network& net, std::span<const Example> data,
                    LossKind loss, double smooth_eps = 1.0);

// Trains the convolutional stack of a classifier on an auxiliary labelled set
// through a temporary head with `aux_classes` outputs, then copies the learned
// convolution weights back into `net`. Trainability flags of `net` are left
// as they were.
std::vector<EpochReport> PretrainFeatures(Network& net,
                                          std::span<const Example> aux_data,
                                          std::size_t aux_classes,
                                          const TrainConfig& config,
                                          const EpochCallback& on_epoch = {});

}  // namespace olens

#endif  // OLENS_TRAINING_HPP_
