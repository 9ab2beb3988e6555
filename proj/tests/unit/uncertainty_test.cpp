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

#include "olens/error.hpp"
#include "olens/uncertainty.hpp"
#include "test_util.hpp"

namespace olens {
namespace {

McSampleSet OnePixel(std::initializer_list<double> values) {
  McSampleSet set;
  for (double v : values) set.samples.push_back(Tensor({1, 1, 1}, {v}));
  return set;
}

TEST(Variance, HandComputedSplit) {
  const auto r = DecomposeVariance(OnePixel({0.2, 0.4, 0.6, 0.8}));
  EXPECT_NEAR(r.mean[0], 0.5, 1e-15);
  EXPECT_NEAR(r.epistemic[0], 0.05, 1e-15);
  EXPECT_NEAR(r.aleatoric[0], 0.20, 1e-15);
  EXPECT_EQ(r.T, 4u);
  EXPECT_LT(DecompositionResidual(r), 1e-15);
}

TEST(Entropy, HandComputedSplit) {
  const auto r = DecomposeEntropy(OnePixel({0.2, 0.8}));
  const double h02 = -0.2 * std::log(0.2) - 0.8 * std::log(0.8);
  EXPECT_NEAR(r.mean[0], 0.5, 1e-15);
  EXPECT_NEAR(r.aleatoric[0], h02, 1e-15);
  EXPECT_NEAR(r.epistemic[0], std::log(2.0) - h02, 1e-15);
  EXPECT_NEAR(h02, 0.5004, 1e-4);
  EXPECT_NEAR(std::log(2.0) - h02, 0.1927, 1e-4);
}

TEST(Entropy, EndpointsAreZero) {
  EXPECT_EQ(BinaryEntropy(0.0), 0.0);
  EXPECT_EQ(BinaryEntropy(1.0), 0.0);
  const auto r = DecomposeEntropy(OnePixel({0.0, 1.0}));
  EXPECT_NEAR(r.epistemic[0], std::log(2.0), 1e-15);
  EXPECT_EQ(r.aleatoric[0], 0.0);
}

TEST(Variance, IdenticalSamplesGiveExactlyZeroEpistemic) {
  const auto r = DecomposeVariance(OnePixel({0.37, 0.37, 0.37, 0.37, 0.37}));
  EXPECT_EQ(r.epistemic[0], 0.0);
  EXPECT_EQ(r.mean[0], 0.37);
}

TEST(Samples, Validation) {
  try {
    DecomposeVariance(OnePixel({0.5}));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSamples);
  }
  try {
    DecomposeVariance(OnePixel({0.5, 1.5}));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRangeError);
  }
  McSampleSet bad;
  bad.samples = {Tensor({2}, {0.5, 0.6}), Tensor({2}, {0.5, 0.5})};
  try {
    UncertaintyForClassifier(bad);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotSimplex);
  }
}

TEST(McSample, DropoutFreeNetworkHasNoEpistemicUncertainty) {
  const Network net = BuildUnet(2, 0.0, {1, 16, 16}, 1);
  RngStream rng(2);
  const Tensor x = testing::RandomTensor({1, 16, 16}, rng, 0, 1, false);
  const McSampleSet set = McSample(net, x, 8, 3);
  EXPECT_TRUE(set.dropout_free);
  const auto r = DecomposeVariance(set);
  for (double v : r.epistemic.data()) EXPECT_EQ(v, 0.0);
}

TEST(McSample, SeededAndIndexAddressable) {
  const Network net = BuildUnet(2, 0.3, {1, 16, 16}, 1);
  RngStream rng(2);
  const Tensor x = testing::RandomTensor({1, 16, 16}, rng, 0, 1, false);
  const McSampleSet a = McSample(net, x, 5, 11);
  const McSampleSet b = McSample(net, x, 5, 11);
  const McSampleSet c = McSample(net, x, 5, 12);
  EXPECT_FALSE(a.dropout_free);
  bool differs = false;
  for (std::size_t t = 0; t < 5; ++t) {
    const auto da = a.samples[t].data(), db = b.samples[t].data(),
               dc = c.samples[t].data();
    EXPECT_TRUE(std::equal(da.begin(), da.end(), db.begin()));
    differs |= !std::equal(da.begin(), da.end(), dc.begin());
    const Tensor one = McSampleOne(net, x, 11, t);
    EXPECT_TRUE(std::equal(da.begin(), da.end(), one.data().begin()));
  }
  EXPECT_TRUE(differs);
  const auto r = DecomposeVariance(a);
  EXPECT_LT(DecompositionResidual(r), 1e-12);
  double epi = 0.0;
  for (double v : r.epistemic.data()) epi += v;
  EXPECT_GT(epi, 0.0);
}

TEST(Classifier, PerClassVarianceOnSimplex) {
  McSampleSet set;
  set.samples = {Tensor({2}, {0.2, 0.8}), Tensor({2}, {0.6, 0.4})};
  const auto r = UncertaintyForClassifier(set);
  EXPECT_NEAR(r.mean[0], 0.4, 1e-15);
  EXPECT_NEAR(r.epistemic[0], 0.04, 1e-15);
  EXPECT_NEAR(r.aleatoric[0], (0.16 + 0.24) / 2, 1e-15);
}

}  // namespace
}  // namespace olens
