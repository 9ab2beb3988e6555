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

#ifndef OLENS_RNG_HPP_
#define OLENS_RNG_HPP_

#include <cstdint>
#include <random>

namespace olens {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the standard distributions are not, so uniform and
// normal variates are derived here directly from raw engine output.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

  // Independent stream for item `index` under `master_seed`. Used wherever
  // work is split per sample so results do not depend on execution order.
  static RngStream Substream(std::uint64_t master_seed, std::uint64_t index);

  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform();
  // Standard normal (Box-Muller, one variate per call).
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  // Uniform integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  bool Bernoulli(double p) { return Uniform() < p; }

  std::uint64_t NextU64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; mixes seeds for substream derivation.
std::uint64_t MixSeed(std::uint64_t x);

}  // namespace olens

#endif  // OLENS_RNG_HPP_
