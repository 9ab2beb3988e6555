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


#ifndef OLENS_SALIENCY_HPP_
#define OLENS_SALIENCY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "olens/network.hpp"
#include "olens/ops.hpp"
#include "olens/tensor.hpp"

namespace olens {

enum class SaliencyMethod { kVanilla, kGuided, kIntegrated };
enum class TargetKind { kClassScore, kRegionSum };
enum class BaselineKind { kZeros, kGray };

std::string_view SaliencyMethodName(SaliencyMethod method);
std::string_view BaselineKindName(BaselineKind kind);

// The scalar whose input gradient is attributed: a pre-softmax class logit,
// or the sum of pre-sigmoid logits over a region of the output map.
struct SaliencyTarget {
  TargetKind kind = TargetKind::kClassScore;
  std::optional<std::size_t> class_index;
  ops::Mask region_mask;

  static SaliencyTarget ClassScore(std::size_t index) {
    return {TargetKind::kClassScore, index, {}};
  }
  static SaliencyTarget RegionSum(ops::Mask mask) {
    return {TargetKind::kRegionSum, std::nullopt, std::move(mask)};
  }
};

struct SaliencyParams {
  std::size_t ig_steps = 0;
  BaselineKind baseline_kind = BaselineKind::kZeros;
  double noise_sigma = 0.0;
  std::size_t n_noise = 0;
};

inline constexpr std::size_t kDefaultIgSteps = 64;
inline constexpr std::size_t kDefaultSmoothSamples = 25;
inline constexpr double kDefaultSmoothSigma = 0.15;

struct SaliencyMap {
  // [H,W], signed.
  Tensor attributions;
  SaliencyMethod method = SaliencyMethod::kVanilla;
  bool smoothed = false;
  SaliencyParams params;
  // Integrated gradients only: |sum(IG) - (F(x) - F(baseline))| and the
  // score difference it is measured against.
  std::optional<double> completeness_residual;
  std::optional<double> score_delta;
};

// Target score F(input); throws BadTarget when the target does not fit the
// network output.
double TargetScore(const Network& net, const Tensor& input,
                   const SaliencyTarget& target);

// |dF/dx| reduced over channels by max.
SaliencyMap VanillaGradient(const Network& net, const Tensor& input,
                            const SaliencyTarget& target);

// As VanillaGradient, with relus also blocking negative upstream gradients.
SaliencyMap GuidedBackprop(const Network& net, const Tensor& input,
                           const SaliencyTarget& target);

// Right-endpoint Riemann approximation of the path integral from `baseline`
// to `input` with `steps` points, channel-summed (signed).
SaliencyMap IntegratedGradients(const Network& net, const Tensor& input,
                                const Tensor& baseline,
                                const SaliencyTarget& target,
                                std::size_t steps = kDefaultIgSteps);

Tensor MakeBaseline(BaselineKind kind, const Shape& shape);

struct SmoothGradOptions {
  std::size_t samples = kDefaultSmoothSamples;
  // Noise std as a fraction of (max(x) - min(x)).
  double sigma = kDefaultSmoothSigma;
  std::uint64_t seed = 0;
  // Used when the base method is integrated gradients.
  std::size_t ig_steps = kDefaultIgSteps;
  BaselineKind baseline = BaselineKind::kZeros;
};

// Mean of the base method over Gaussian-perturbed copies of the input. Noise
// for copy i comes from RngStream::Substream(seed, i).
SaliencyMap SmoothGrad(SaliencyMethod base, const Network& net,
                       const Tensor& input, const SaliencyTarget& target,
                       const SmoothGradOptions& options);

// Runs one method (optionally smoothed) with the given settings.
SaliencyMap Explain(SaliencyMethod method, bool smooth, const Network& net,
                    const Tensor& input, const SaliencyTarget& target,
                    const SmoothGradOptions& options);

// Linear-interpolation percentile, pct in [0,100].
double Percentile(std::vector<double> values, double pct);

// |map| clipped at its pct-th percentile and scaled to [0,1]. pct must lie
// in (50,100]. An all-zero map stays all zero.
Tensor NormalizeForDisplay(const Tensor& map, double pct);
inline Tensor NormalizeForDisplay(const SaliencyMap& map, double pct) {
  return NormalizeForDisplay(map.attributions, pct);
}

// Predicted-foreground mask (probability > 0.5) of a segmentation network,
// from a deterministic pass.
ops::Mask ForegroundMask(const Network& net, const Tensor& input,
                         double threshold = 0.5);

// Share of sum |attribution| falling inside `region` (same length as map).
double AttributionMassFraction(const Tensor& map, const ops::Mask& region);

}  // namespace olens

#endif  // OLENS_SALIENCY_HPP_
