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


#ifndef OLENS_UNCERTAINTY_HPP_
#define OLENS_UNCERTAINTY_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "olens/network.hpp"
#include "olens/tensor.hpp"

namespace olens {

// T stochastic predictions for one input.
struct McSampleSet {
  std::vector<Tensor> samples;
  std::uint64_t master_seed = 0;
  // Set when the network had no active dropout; every sample is then the same.
  bool dropout_free = false;

  std::size_t T() const { return samples.size(); }
};

enum class Decomposition { kVariance, kEntropy };

struct UncertaintyResult {
  Tensor mean;
  Tensor epistemic;
  Tensor aleatoric;
  Decomposition decomposition = Decomposition::kVariance;
  std::size_t T = 0;
};

inline constexpr std::size_t kDefaultMcSamples = 50;

// Runs T stochastic forward passes; pass t draws its dropout masks from
// RngStream::Substream(master_seed, t) only, so any single sample can be
// recomputed on its own.
McSampleSet McSample(const Network& net, const Tensor& input, std::size_t T,
                     std::uint64_t master_seed);

// The forward pass McSample uses for sample `index`.
Tensor McSampleOne(const Network& net, const Tensor& input,
                   std::uint64_t master_seed, std::size_t index);

// Mean p, epistemic = population variance of p_t, aleatoric = mean p_t(1-p_t).
// epistemic + aleatoric equals p(1-p) up to round-off.
UncertaintyResult DecomposeVariance(const McSampleSet& samples);

// Total = H(mean), aleatoric = mean H(p_t), epistemic = total - aleatoric
// clamped at zero. Binary entropies in nats.
UncertaintyResult DecomposeEntropy(const McSampleSet& samples);

// Coordinatewise variance decomposition over class probability vectors.
// Throws NotSimplex when a sample has negative entries or does not sum to 1.
UncertaintyResult UncertaintyForClassifier(const McSampleSet& samples);

double BinaryEntropy(double p);

// max |epistemic + aleatoric - mean(1-mean)|.
double DecompositionResidual(const UncertaintyResult& result);

}  // namespace olens

#endif  // OLENS_UNCERTAINTY_HPP_
