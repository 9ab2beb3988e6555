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


#include "olens/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "olens/error.hpp"
#include "olens/ops.hpp"
#include "olens/rng.hpp"

namespace olens {

void TrainConfig::Validate() const {
  // lr = 0 is allowed: it freezes the network, which tests rely on.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be >= 0");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "val_fraction must lie in (0,1)");
  }
  if (batch_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  }
  if (!(smooth_eps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smooth_eps must be positive");
  }
}

Tensor DiceLoss(const Tensor& pred, const Tensor& target, double smooth_eps,
                Tape* tape) {
  if (pred.shape() != target.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "dice: prediction " + ShapeToString(pred.shape()) + " vs target " +
                    ShapeToString(target.shape()));
  }
  double target_sum = 0.0;
  for (double t : target.data()) target_sum += t;
  const Tensor overlap =
      ops::Reduce(ops::Mul(pred, target, tape), ops::ReduceKind::kSum, nullptr, tape);
  const Tensor pred_sum = ops::Reduce(pred, ops::ReduceKind::kSum, nullptr, tape);
  const Tensor num = ops::AddScalar(ops::Scale(overlap, 2.0, tape), smooth_eps, tape);
  const Tensor den = ops::AddScalar(pred_sum, target_sum + smooth_eps, tape);
  return ops::AddScalar(ops::Scale(ops::Div(num, den, tape), -1.0, tape), 1.0, tape);
}

Tensor CrossEntropy(const Tensor& pred, int target_class, Tape* tape) {
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= pred.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "class " + std::to_string(target_class) + " outside " +
                    std::to_string(pred.size()) + " classes");
  }
  const Tensor p = ops::Select(pred, static_cast<std::size_t>(target_class), tape);
  return ops::Scale(ops::Log(ops::AddScalar(p, 1e-12, tape), tape), -1.0, tape);
}

Gradients CollectGradients(const Network& net) {
  Gradients out;
  for (const Tensor& p : net.parameters()) {
    out.emplace_back(p.grad().begin(), p.grad().end());
  }
  return out;
}

void OptimizerStep(Network& net, const Gradients& grads, const TrainConfig& config,
                   OptimizerState& state) {
  auto& params = net.parameters();
  const auto trainable = net.parameter_trainable();
  if (grads.size() != params.size()) {
    throw Error(ErrorCode::kMissingGradient,
                "expected " + std::to_string(params.size()) + " gradient buffers, got " +
                    std::to_string(grads.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (trainable[i] && grads[i].size() != params[i].size()) {
      throw Error(ErrorCode::kMissingGradient,
                  "no gradient for trainable parameter " + std::to_string(i));
    }
  }
  const double lr = config.learning_rate;
  ++state.step;
  if (config.optimizer == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!trainable[i]) continue;
      auto values = params[i].MutableData();
      for (std::size_t j = 0; j < values.size(); ++j) values[j] -= lr * grads[i][j];
    }
    return;
  }
  if (state.first_moment.size() != params.size()) {
    state.first_moment.assign(params.size(), {});
    state.second_moment.assign(params.size(), {});
  }
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!trainable[i]) continue;
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != params[i].size()) {
      m.assign(params[i].size(), 0.0);
      v.assign(params[i].size(), 0.0);
    }
    auto values = params[i].MutableData();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grads[i][j];
      m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g;
      v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      values[j] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SplitIndices(
    std::size_t n, double val_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (n < 2) return {order, order};
  RngStream rng = RngStream::Substream(seed, 0x5B117);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.UniformInt(i + 1)]);
  }
  std::size_t n_val = static_cast<std::size_t>(std::floor(n * val_fraction + 0.5));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train(order.begin() + n_val, order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

namespace {

Tensor ItemLoss(const Tensor& output, const Example& ex, const TrainConfig& config,
                Tape* tape) {
  if (config.loss == LossKind::kDice) {
    if (!ex.mask.defined()) {
      throw Error(ErrorCode::kDataMismatch, "segmentation example without mask");
    }
    return DiceLoss(output, ex.mask, config.smooth_eps, tape);
  }
  return CrossEntropy(output, ex.label, tape);
}

std::vector<Example> Gather(std::span<const Example> data,
                            const std::vector<std::size_t>& idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

}  // namespace

std::vector<EpochReport> Train(Network& net, std::span<const Example> data,
                               const TrainConfig& config,
                               const EpochCallback& on_epoch) {
  config.Validate();
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  const auto [train_idx, val_idx] =
      SplitIndices(data.size(), config.val_fraction, config.seed);
  const std::vector<Example> val = Gather(data, val_idx);

  auto& params = net.parameters();
  OptimizerState state;
  RngStream dropout_rng = RngStream::Substream(config.seed, 0xD409);
  std::vector<std::size_t> order = train_idx;
  std::vector<EpochReport> reports;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    RngStream shuffle = RngStream::Substream(config.seed, 0x10000 + epoch);
    for (std::size_t i = order.size(); i-- > 1;) {
      std::swap(order[i], order[shuffle.UniformInt(i + 1)]);
    }
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      Gradients grads(params.size());
      for (std::size_t p = 0; p < params.size(); ++p) {
        grads[p].assign(params[p].size(), 0.0);
      }
      // Items are reduced in batch order, so the sum does not depend on how
      // the per-item passes were scheduled.
      for (std::size_t k = begin; k < end; ++k) {
        const Example& ex = data[order[k]];
        Tape tape;
        ForwardOptions fwd;
        fwd.mode = ForwardMode::kStochastic;
        fwd.rng = &dropout_rng;
        fwd.tape = &tape;
        const Tensor out = net.Forward(ex.input, fwd);
        const Tensor loss = ItemLoss(out, ex, config, &tape);
        loss_sum += loss.item();
        tape.Backward(loss);
        for (std::size_t p = 0; p < params.size(); ++p) {
          const auto g = params[p].grad();
          for (std::size_t j = 0; j < g.size(); ++j) grads[p][j] += inv * g[j];
        }
      }
      OptimizerStep(net, grads, config, state);
    }
    EpochReport report;
    report.epoch = epoch + 1;
    report.train_loss = loss_sum / static_cast<double>(order.size());
    report.val_loss = Evaluate(net, val, config.loss, config.smooth_eps).mean_loss;
    report.wall_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    net.set_epochs_trained(net.epochs_trained() + 1);
    reports.push_back(report);
    if (on_epoch) on_epoch(report);
  }
  for (Tensor& p : params) p.clear_grad();
  return reports;
}

EvalResult Evaluate(const Network& net, std::span<const Example> data,
                    LossKind loss, double smooth_eps) {
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "evaluation set is empty");
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.smooth_eps = smooth_eps;
  double total = 0.0;
  std::size_t correct = 0;
  for (const Example& ex : data) {
    const Tensor out = net.Forward(ex.input);
    total += ItemLoss(out, ex, cfg, nullptr).item();
    if (loss == LossKind::kCrossEntropy) {
      const auto p = out.data();
      const auto best = static_cast<int>(
          std::max_element(p.begin(), p.end()) - p.begin());
      correct += best == ex.label ? 1 : 0;
    }
  }
  EvalResult result;
  result.mean_loss = total / static_cast<double>(data.size());
  if (loss == LossKind::kCrossEntropy) {
    result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  }
  return result;
}

std::vector<EpochReport> PretrainFeatures(Network& net,
                                          std::span<const Example> aux_data,
                                          std::size_t aux_classes,
                                          const TrainConfig& config,
                                          const EpochCallback& on_epoch) {
  if (net.arch() != "classifier") {
    throw Error(ErrorCode::kInvalidArgument,
                "feature pretraining needs a classifier network");
  }
  const auto& layers = net.layers();
  double dropout = 0.0;
  for (const LayerSpec& l : layers) {
    if (l.kind == LayerKind::kDropout) dropout = l.rate;
  }
  Network aux = BuildClassifier(aux_classes, net.input_shape(), dropout,
                                MixSeed(net.seed() + 1), layers[0].out_channels);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind != LayerKind::kConv) continue;
    aux.set_trainable(i, true);
    const auto& src = net.layer_parameters(i);
    const auto& dst = aux.layer_parameters(i);
    for (std::size_t k = 0; k < src.size(); ++k) {
      const auto from = net.parameters()[src[k]].data();
      auto to = aux.parameters()[dst[k]].MutableData();
      std::copy(from.begin(), from.end(), to.begin());
    }
  }
  TrainConfig cfg = config;
  cfg.loss = LossKind::kCrossEntropy;
  auto reports = Train(aux, aux_data, cfg, on_epoch);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind != LayerKind::kConv) continue;
    const auto& src = aux.layer_parameters(i);
    const auto& dst = net.layer_parameters(i);
    for (std::size_t k = 0; k < src.size(); ++k) {
      const auto from = aux.parameters()[src[k]].data();
      auto to = net.parameters()[dst[k]].MutableData();
      std::copy(from.begin(), from.end(), to.begin());
    }
  }
  return reports;
}

}  // namespace olens
