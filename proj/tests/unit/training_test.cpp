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


#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "olens/error.hpp"
#include "olens/training.hpp"
#include "test_util.hpp"

namespace olens {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kInvalidArgument;
}

TEST(Dice, HandComputedValues) {
  const Tensor p({1, 2, 2}, {1, 1, 0, 0});
  const Tensor t({1, 2, 2}, {1, 0, 0, 0});
  // overlap 1, |p| 2, |t| 1.
  EXPECT_NEAR(DiceLoss(p, t, 1e-300).item(), 1.0 - 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(DiceLoss(p, t, 1.0).item(), 1.0 - 3.0 / 4.0, 1e-15);
  EXPECT_NEAR(DiceLoss(t, t, 1.0).item(), 0.0, 1e-15);
  const Tensor half({1, 1, 2}, {0.5, 0.5});
  const Tensor one({1, 1, 2}, {1, 0});
  EXPECT_NEAR(DiceLoss(half, one, 1e-300).item(), 0.5, 1e-15);
}

TEST(Dice, EmptyMaskWithSmoothingIsFinite) {
  const Tensor z = Tensor::Zeros({1, 2, 2});
  EXPECT_NEAR(DiceLoss(z, z, 1.0).item(), 0.0, 1e-15);
}

TEST(Dice, ShapeMismatch) {
  EXPECT_EQ(CodeOf([] { DiceLoss(Tensor::Zeros({4}), Tensor::Zeros({2, 2}), 1.0); }),
            ErrorCode::kShapeMismatch);
}

TEST(Dice, GradientMatchesFiniteDifference) {
  RngStream rng(2);
  const Tensor p = testing::RandomTensor({1, 4, 4}, rng, 0.05, 0.95);
  Tensor t = testing::RandomTensor({1, 4, 4}, rng, 0, 1, false);
  for (double& v : t.MutableData()) v = v > 0.6 ? 1.0 : 0.0;
  auto f = [t](const std::vector<Tensor>& v, Tape* tape) {
    return DiceLoss(v[0], t, 1.0, tape);
  };
  EXPECT_LT(testing::GradCheck(f, {p}).max_rel_error, 1e-7);
}

TEST(CrossEntropy, ValueAndRange) {
  const Tensor p({2}, {0.2, 0.8});
  EXPECT_NEAR(CrossEntropy(p, 1).item(), -std::log(0.8 + 1e-12), 1e-15);
  EXPECT_EQ(CodeOf([&] { CrossEntropy(p, 2); }), ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(CodeOf([&] { CrossEntropy(p, -1); }), ErrorCode::kIndexOutOfRange);
}

Network Probe() { return BuildLinearProbe({1, 1, 2}, 1, 3); }

TEST(Optimizer, AdamFirstTwoStepsMatchClosedForm) {
  Network net = Probe();
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  const double w0 = net.parameters()[0][0];
  const double w_other = net.parameters()[0][1];
  const double g1 = 0.5, g2 = -2.0;
  Gradients grads{{g1, 0.0}, {0.0}};
  OptimizerState state;
  OptimizerStep(net, grads, cfg, state);
  // Step 1: bias-corrected moments are g and g^2, so the step is lr*sign(g).
  const double w1 = w0 - 0.01 * g1 / (std::fabs(g1) + 1e-8);
  EXPECT_NEAR(net.parameters()[0][0], w1, 1e-15);
  EXPECT_EQ(net.parameters()[0][1], w_other);  // zero gradient, zero step
  grads[0][0] = g2;
  OptimizerStep(net, grads, cfg, state);
  const double m = 0.9 * 0.1 * g1 + 0.1 * g2;
  const double v = 0.999 * 0.001 * g1 * g1 + 0.001 * g2 * g2;
  const double m_hat = m / (1 - 0.81), v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(net.parameters()[0][0], w1 - 0.01 * m_hat / (std::sqrt(v_hat) + 1e-8),
              1e-15);
}

TEST(Optimizer, SgdStep) {
  Network net = Probe();
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::kSgd;
  cfg.learning_rate = 0.1;
  const double b0 = net.parameters()[1][0];
  OptimizerState state;
  OptimizerStep(net, {{0.0, 0.0}, {2.0}}, cfg, state);
  EXPECT_DOUBLE_EQ(net.parameters()[1][0], b0 - 0.2);
}

TEST(Optimizer, MissingGradient) {
  Network net = Probe();
  OptimizerState state;
  EXPECT_EQ(CodeOf([&] { OptimizerStep(net, {{0.0, 0.0}}, TrainConfig{}, state); }),
            ErrorCode::kMissingGradient);
  EXPECT_EQ(CodeOf([&] { OptimizerStep(net, {{0.0}, {0.0}}, TrainConfig{}, state); }),
            ErrorCode::kMissingGradient);
}

TEST(Optimizer, FrozenParametersUntouched) {
  Network net = BuildClassifier(2, {1, 16, 16}, 0.0, 1);
  const std::vector<Tensor> before = [&] {
    std::vector<Tensor> c;
    for (const Tensor& p : net.parameters()) c.push_back(p.Clone());
    return c;
  }();
  Gradients grads;
  for (const Tensor& p : net.parameters()) grads.emplace_back(p.size(), 1.0);
  OptimizerState state;
  OptimizerStep(net, grads, TrainConfig{}, state);
  const auto trainable = net.parameter_trainable();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto a = before[i].data(), b = net.parameters()[i].data();
    EXPECT_EQ(std::equal(a.begin(), a.end(), b.begin()), !trainable[i]) << i;
  }
}

TEST(Split, DisjointCoverAndRoundedSize) {
  const auto [train, val] = SplitIndices(200, 0.2, 4);
  EXPECT_EQ(val.size(), 40u);
  EXPECT_EQ(train.size(), 160u);
  std::set<std::size_t> all(train.begin(), train.end());
  all.insert(val.begin(), val.end());
  EXPECT_EQ(all.size(), 200u);
  EXPECT_EQ(SplitIndices(200, 0.2, 4), SplitIndices(200, 0.2, 4));
  EXPECT_NE(SplitIndices(200, 0.2, 4).second, SplitIndices(200, 0.2, 5).second);
  EXPECT_EQ(SplitIndices(3, 0.01, 1).second.size(), 1u);
}

TEST(Config, Validation) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
  c = TrainConfig{};
  c.learning_rate = -1;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
  c = TrainConfig{};
  c.val_fraction = 1.0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
}

// Bright versus dark 16x16 images; trivially separable.
std::vector<Example> Toy(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double base = label ? 0.7 : 0.3;
    std::vector<double> v(256);
    for (double& x : v) x = base + 0.1 * (rng.Uniform() - 0.5);
    out.push_back({Tensor({1, 16, 16}, std::move(v)), Tensor(), label});
  }
  return out;
}

TEST(Train, ZeroEpochsLeavesNetworkUnchanged) {
  Network net = BuildClassifier(2, {1, 16, 16}, 0.2, 1);
  const auto before = net.parameters()[net.parameters().size() - 2].Clone();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.loss = LossKind::kCrossEntropy;
  EXPECT_TRUE(Train(net, Toy(10, 1), cfg).empty());
  const auto a = before.data(), b = net.parameters()[net.parameters().size() - 2].data();
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_EQ(net.epochs_trained(), 0u);
}

TEST(Train, HeadLearnsAndConvsStayFrozen) {
  Network net = BuildClassifier(2, {1, 16, 16}, 0.2, 2);
  std::vector<std::vector<double>> convs;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    if (net.layers()[i].kind != LayerKind::kConv) continue;
    for (std::size_t p : net.layer_parameters(i)) {
      const auto d = net.parameters()[p].data();
      convs.emplace_back(d.begin(), d.end());
    }
  }
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.loss = LossKind::kCrossEntropy;
  const auto data = Toy(40, 3);
  std::size_t callbacks = 0;
  const auto reports = Train(net, data, cfg, [&](const EpochReport&) { ++callbacks; });
  ASSERT_EQ(reports.size(), 15u);
  EXPECT_EQ(callbacks, 15u);
  EXPECT_EQ(reports.front().epoch, 1u);
  EXPECT_LT(reports.back().train_loss, reports.front().train_loss);
  EXPECT_GE(*Evaluate(net, data, LossKind::kCrossEntropy).accuracy, 0.9);
  std::size_t k = 0;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    if (net.layers()[i].kind != LayerKind::kConv) continue;
    for (std::size_t p : net.layer_parameters(i)) {
      const auto d = net.parameters()[p].data();
      EXPECT_TRUE(std::equal(d.begin(), d.end(), convs[k++].begin()));
    }
  }
  EXPECT_EQ(net.epochs_trained(), 15u);
}

TEST(Train, DeterministicForFixedSeed) {
  auto run = [] {
    Network net = BuildUnet(2, 0.2, {1, 16, 16}, 5);
    std::vector<Example> data;
    RngStream rng(8);
    for (int i = 0; i < 6; ++i) {
      Tensor x = testing::RandomTensor({1, 16, 16}, rng, 0, 1, false);
      Tensor m = x.Clone();
      for (double& v : m.MutableData()) v = v > 0.5 ? 1.0 : 0.0;
      data.push_back({x, m, -1});
    }
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 2;
    cfg.seed = 9;
    const auto reports = Train(net, data, cfg);
    return std::make_pair(reports.back().train_loss, net.parameters()[0].Clone());
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_TRUE(std::equal(a.second.data().begin(), a.second.data().end(),
                         b.second.data().begin()));
}

TEST(Train, EmptyDataset) {
  Network net = Probe();
  EXPECT_EQ(CodeOf([&] { Train(net, {}, TrainConfig{}); }), ErrorCode::kEmptyDataset);
}

}  // namespace
}  // namespace olens
