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


#include "olens/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "olens/error.hpp"
#include "olens/rng.hpp"

namespace olens {
namespace {

void CheckSampleSet(const McSampleSet& set) {
  if (set.T() < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 2 samples, got " + std::to_string(set.T()));
  }
  const Shape& shape = set.samples.front().shape();
  for (const Tensor& s : set.samples) {
    if (s.shape() != shape) {
      throw Error(ErrorCode::kShapeMismatch, "samples differ in shape");
    }
    for (double v : s.data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kRangeError,
                    "sample value outside [0,1]: " + std::to_string(v));
      }
    }
  }
}

// Running mean: identical samples reproduce their value bit-exactly, so a
// dropout-free network yields exactly zero variance.
Tensor MeanOf(const McSampleSet& set) {
  const std::size_t n = set.samples.front().size();
  std::vector<double> mean(n, 0.0);
  double k = 0.0;
  for (const Tensor& s : set.samples) {
    k += 1.0;
    const auto d = s.data();
    for (std::size_t i = 0; i < n; ++i) mean[i] += (d[i] - mean[i]) / k;
  }
  return Tensor(set.samples.front().shape(), std::move(mean));
}

}  // namespace

Tensor McSampleOne(const Network& net, const Tensor& input,
                   std::uint64_t master_seed, std::size_t index) {
  RngStream rng = RngStream::Substream(master_seed, index);
  ForwardOptions options;
  options.mode = ForwardMode::kStochastic;
  options.rng = &rng;
  return net.Forward(input, options);
}

McSampleSet McSample(const Network& net, const Tensor& input, std::size_t T,
                     std::uint64_t master_seed) {
  if (T < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 2 samples, got " + std::to_string(T));
  }
  McSampleSet set;
  set.master_seed = master_seed;
  set.dropout_free = !net.has_dropout();
  set.samples.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    set.samples.push_back(McSampleOne(net, input, master_seed, t));
  }
  return set;
}

UncertaintyResult DecomposeVariance(const McSampleSet& samples) {
  CheckSampleSet(samples);
  UncertaintyResult r;
  r.decomposition = Decomposition::kVariance;
  r.T = samples.T();
  r.mean = MeanOf(samples);
  const auto mean = r.mean.data();
  const std::size_t n = mean.size();
  std::vector<double> epi(n, 0.0), ale(n, 0.0);
  for (const Tensor& s : samples.samples) {
    const auto d = s.data();
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = d[i] - mean[i];
      epi[i] += dev * dev;
      ale[i] += d[i] * (1.0 - d[i]);
    }
  }
  const double inv_t = 1.0 / static_cast<double>(samples.T());
  for (std::size_t i = 0; i < n; ++i) {
    epi[i] *= inv_t;
    ale[i] *= inv_t;
  }
  r.epistemic = Tensor(r.mean.shape(), std::move(epi));
  r.aleatoric = Tensor(r.mean.shape(), std::move(ale));
  return r;
}

double BinaryEntropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

UncertaintyResult DecomposeEntropy(const McSampleSet& samples) {
  CheckSampleSet(samples);
  UncertaintyResult r;
  r.decomposition = Decomposition::kEntropy;
  r.T = samples.T();
  r.mean = MeanOf(samples);
  const auto mean = r.mean.data();
  const std::size_t n = mean.size();
  std::vector<double> ale(n, 0.0), epi(n, 0.0);
  for (const Tensor& s : samples.samples) {
    const auto d = s.data();
    for (std::size_t i = 0; i < n; ++i) ale[i] += BinaryEntropy(d[i]);
  }
  const double inv_t = 1.0 / static_cast<double>(samples.T());
  for (std::size_t i = 0; i < n; ++i) {
    ale[i] *= inv_t;
    epi[i] = std::max(0.0, BinaryEntropy(mean[i]) - ale[i]);
  }
  r.epistemic = Tensor(r.mean.shape(), std::move(epi));
  r.aleatoric = Tensor(r.mean.shape(), std::move(ale));
  return r;
}

UncertaintyResult UncertaintyForClassifier(const McSampleSet& samples) {
  for (const Tensor& s : samples.samples) {
    double sum = 0.0;
    for (double v : s.data()) {
      if (v < 0.0) throw Error(ErrorCode::kNotSimplex, "negative class probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::kNotSimplex,
                  "class probabilities sum to " + std::to_string(sum));
    }
  }
  return DecomposeVariance(samples);
}

double DecompositionResidual(const UncertaintyResult& result) {
  double worst = 0.0;
  const auto m = result.mean.data();
  const auto e = result.epistemic.data();
  const auto a = result.aleatoric.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    worst = std::max(worst, std::abs(e[i] + a[i] - m[i] * (1.0 - m[i])));
  }
  return worst;
}

}  // namespace olens
