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


#include "olens/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "olens/error.hpp"
#include "olens/rng.hpp"

namespace olens {
namespace {

void CheckTarget(const Network& net, const SaliencyTarget& target) {
  const Shape& out = net.output_shape();
  if (target.kind == TargetKind::kClassScore) {
    if (!target.class_index || out.size() != 1 || *target.class_index >= out[0]) {
      throw Error(ErrorCode::kBadTarget,
                  "class target does not fit network output " + ShapeToString(out));
    }
    return;
  }
  if (target.region_mask.size() != NumElements(out) || out.size() != 3) {
    throw Error(ErrorCode::kBadTarget,
                "region mask does not match network output " + ShapeToString(out));
  }
  if (std::none_of(target.region_mask.begin(), target.region_mask.end(),
                   [](std::uint8_t v) { return v != 0; })) {
    throw Error(ErrorCode::kBadTarget, "region mask is empty");
  }
}

Tensor ScoreTensor(const Network& net, const Tensor& input,
                   const SaliencyTarget& target, Tape* tape) {
  ForwardOptions options;
  options.tape = tape;
  options.output = OutputKind::kLogits;
  options.param_grads = false;
  const Tensor logits = net.Forward(input, options);
  if (target.kind == TargetKind::kClassScore) {
    return ops::Select(logits, *target.class_index, tape);
  }
  return ops::Reduce(logits, ops::ReduceKind::kSum, &target.region_mask, tape);
}

// dF/dx at `input` under the given relu rule.
std::vector<double> InputGradient(const Network& net, const Tensor& input,
                                  const SaliencyTarget& target,
                                  ReluBackwardMode mode, double* score = nullptr) {
  Tensor x(input.shape(), {input.data().begin(), input.data().end()}, true);
  Tape tape;
  ScopedReluMode guard(tape, mode);
  const Tensor f = ScoreTensor(net, x, target, &tape);
  if (score) *score = f.item();
  tape.Backward(f);
  return {x.grad().begin(), x.grad().end()};
}

Shape SpatialShape(const Tensor& input) {
  if (input.rank() != 3) {
    throw Error(ErrorCode::kShapeMismatch,
                "saliency needs a [C,H,W] input, got " + ShapeToString(input.shape()));
  }
  return {input.dim(1), input.dim(2)};
}

Tensor MaxAbsOverChannels(const std::vector<double>& grad, const Shape& in_shape) {
  const std::size_t c = in_shape[0], hw = in_shape[1] * in_shape[2];
  std::vector<double> out(hw, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < hw; ++i) {
      out[i] = std::max(out[i], std::abs(grad[ch * hw + i]));
    }
  }
  return Tensor({in_shape[1], in_shape[2]}, std::move(out));
}

SaliencyMap GradientMap(const Network& net, const Tensor& input,
                        const SaliencyTarget& target, ReluBackwardMode mode,
                        SaliencyMethod method) {
  CheckTarget(net, target);
  SpatialShape(input);
  SaliencyMap map;
  map.method = method;
  map.attributions =
      MaxAbsOverChannels(InputGradient(net, input, target, mode), input.shape());
  return map;
}

}  // namespace

std::string_view SaliencyMethodName(SaliencyMethod method) {
  switch (method) {
    case SaliencyMethod::kVanilla: return "vanilla";
    case SaliencyMethod::kGuided: return "guided";
    case SaliencyMethod::kIntegrated: return "ig";
  }
  return "unknown";
}

std::string_view BaselineKindName(BaselineKind kind) {
  return kind == BaselineKind::kZeros ? "zeros" : "gray";
}

double TargetScore(const Network& net, const Tensor& input,
                   const SaliencyTarget& target) {
  CheckTarget(net, target);
  return ScoreTensor(net, input, target, nullptr).item();
}

SaliencyMap VanillaGradient(const Network& net, const Tensor& input,
                            const SaliencyTarget& target) {
  return GradientMap(net, input, target, ReluBackwardMode::kStandard,
                     SaliencyMethod::kVanilla);
}

SaliencyMap GuidedBackprop(const Network& net, const Tensor& input,
                           const SaliencyTarget& target) {
  return GradientMap(net, input, target, ReluBackwardMode::kGuided,
                     SaliencyMethod::kGuided);
}

Tensor MakeBaseline(BaselineKind kind, const Shape& shape) {
  return Tensor::Full(shape, kind == BaselineKind::kZeros ? 0.0 : 0.5);
}

SaliencyMap IntegratedGradients(const Network& net, const Tensor& input,
                                const Tensor& baseline,
                                const SaliencyTarget& target, std::size_t steps) {
  CheckTarget(net, target);
  const Shape spatial = SpatialShape(input);
  if (baseline.shape() != input.shape()) {
    throw Error(ErrorCode::kBadBaseline,
                "baseline " + ShapeToString(baseline.shape()) + " vs input " +
                    ShapeToString(input.shape()));
  }
  if (steps == 0) throw Error(ErrorCode::kBadSteps, "steps must be at least 1");

  const auto x = input.data();
  const auto x0 = baseline.data();
  const std::size_t n = x.size();
  std::vector<double> grad_sum(n, 0.0);
  std::vector<double> point(n);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(steps);
    for (std::size_t i = 0; i < n; ++i) point[i] = x0[i] + alpha * (x[i] - x0[i]);
    const auto g = InputGradient(net, Tensor(input.shape(), point), target,
                                 ReluBackwardMode::kStandard);
    for (std::size_t i = 0; i < n; ++i) grad_sum[i] += g[i];
  }
  const std::size_t c = input.dim(0), hw = spatial[0] * spatial[1];
  std::vector<double> attr(hw, 0.0);
  double total = 0.0;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < hw; ++i) {
      const std::size_t j = ch * hw + i;
      const double ig = (x[j] - x0[j]) * grad_sum[j] / static_cast<double>(steps);
      attr[i] += ig;
      total += ig;
    }
  }
  const double delta = TargetScore(net, input, target) - TargetScore(net, baseline, target);

  SaliencyMap map;
  map.method = SaliencyMethod::kIntegrated;
  map.attributions = Tensor(spatial, std::move(attr));
  map.params.ig_steps = steps;
  map.completeness_residual = std::abs(total - delta);
  map.score_delta = delta;
  return map;
}

SaliencyMap SmoothGrad(SaliencyMethod base, const Network& net,
                       const Tensor& input, const SaliencyTarget& target,
                       const SmoothGradOptions& options) {
  if (options.samples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "smoothgrad needs at least 1 sample");
  }
  if (!(options.sigma >= 0.0) || !std::isfinite(options.sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothgrad sigma must be >= 0");
  }
  const auto x = input.data();
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double stddev = options.sigma * (*hi - *lo);
  const Tensor baseline = MakeBaseline(options.baseline, input.shape());

  SaliencyMap result;
  std::vector<double> mean;
  double residual_sum = 0.0, delta_mean = 0.0;
  std::vector<double> noisy(x.size());
  for (std::size_t s = 0; s < options.samples; ++s) {
    RngStream rng = RngStream::Substream(options.seed, s);
    for (std::size_t i = 0; i < x.size(); ++i) noisy[i] = x[i] + stddev * rng.Normal();
    const Tensor perturbed(input.shape(), noisy);
    SaliencyMap one;
    switch (base) {
      case SaliencyMethod::kVanilla:
        one = VanillaGradient(net, perturbed, target);
        break;
      case SaliencyMethod::kGuided:
        one = GuidedBackprop(net, perturbed, target);
        break;
      case SaliencyMethod::kIntegrated:
        one = IntegratedGradients(net, perturbed, baseline, target, options.ig_steps);
        break;
    }
    // Running mean keeps identical maps bit-identical.
    const double k = static_cast<double>(s + 1);
    const auto a = one.attributions.data();
    if (mean.empty()) mean.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) mean[i] += (a[i] - mean[i]) / k;
    if (one.score_delta) delta_mean += (*one.score_delta - delta_mean) / k;
    if (s == 0) result = one;
    residual_sum += one.completeness_residual.value_or(0.0);
  }
  result.attributions = Tensor(result.attributions.shape(), std::move(mean));
  result.smoothed = true;
  result.params.noise_sigma = options.sigma;
  result.params.n_noise = options.samples;
  if (base == SaliencyMethod::kIntegrated) {
    double total = 0.0;
    for (double v : result.attributions.data()) total += v;
    result.completeness_residual = std::abs(total - delta_mean);
    result.score_delta = delta_mean;
    result.params.baseline_kind = options.baseline;
  }
  return result;
}

SaliencyMap Explain(SaliencyMethod method, bool smooth, const Network& net,
                    const Tensor& input, const SaliencyTarget& target,
                    const SmoothGradOptions& options) {
  if (smooth) return SmoothGrad(method, net, input, target, options);
  switch (method) {
    case SaliencyMethod::kVanilla:
      return VanillaGradient(net, input, target);
    case SaliencyMethod::kGuided:
      return GuidedBackprop(net, input, target);
    case SaliencyMethod::kIntegrated: {
      SaliencyMap map = IntegratedGradients(
          net, input, MakeBaseline(options.baseline, input.shape()), target,
          options.ig_steps);
      map.params.baseline_kind = options.baseline;
      return map;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown saliency method");
}

double Percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "empty percentile input");
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Tensor NormalizeForDisplay(const Tensor& map, double pct) {
  if (!(pct > 50.0 && pct <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "percentile must lie in (50,100]");
  }
  std::vector<double> mags(map.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(map[i]);
  const double clip = Percentile(mags, pct);
  std::vector<double> out(mags.size(), 0.0);
  if (clip > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(mags[i], clip) / clip;
  }
  return Tensor(map.shape(), std::move(out));
}

ops::Mask ForegroundMask(const Network& net, const Tensor& input, double threshold) {
  const Tensor prob = net.Forward(input);
  ops::Mask mask(prob.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = prob[i] > threshold ? 1 : 0;
  return mask;
}

double AttributionMassFraction(const Tensor& map, const ops::Mask& region) {
  if (region.size() != map.size()) {
    throw Error(ErrorCode::kShapeMismatch, "region does not match map");
  }
  double inside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i) {
    const double a = std::abs(map[i]);
    total += a;
    if (region[i]) inside += a;
  }
  return total > 0.0 ? inside / total : 0.0;
}

}  // namespace olens
