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


#ifndef OLENS_SYNTH_HPP_
#define OLENS_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "olens/ops.hpp"
#include "olens/tensor.hpp"

namespace olens {

// Calibration constants of the generators. Changing any of them changes every
// generated dataset.
inline constexpr double kVesselNoiseSigma = 0.05;
inline constexpr double kVesselContrast = 0.3;
inline constexpr double kMinForeground = 0.02;
inline constexpr double kMaxForeground = 0.30;
inline constexpr double kLesionMinContrast = 0.3;
inline constexpr double kLesionMaxContrast = 0.5;
inline constexpr double kLesionNoiseSigma = 0.03;

// Per-pixel classification of vessel support by the widths of the strokes
// covering it.
enum class WidthClass : std::uint8_t {
  kBackground = 0,
  kThin = 1,   // covered only by strokes of width <= 2
  kThick = 2,  // covered only by strokes of width >= 3
  kMixed = 3,  // covered by both
};

struct VesselMeta {
  std::uint64_t seed = 0;
  std::size_t index = 0;
  std::size_t n_strokes = 0;
  std::vector<int> stroke_widths;
  std::vector<WidthClass> width_class;  // H*W, row-major
  std::size_t thin_pixels = 0;
  std::size_t thick_pixels = 0;
};

struct VesselSample {
  Tensor image;  // [1,H,W] in [0,1]
  Tensor mask;   // [1,H,W] in {0,1}
  VesselMeta meta;
};

// size >= 32 and divisible by 4. Each image: smooth illumination gradient,
// dark curved strokes (at least one of width 1-2 and one of width 3-4),
// Gaussian noise. Images whose foreground fraction falls outside
// [0.02, 0.30] are redrawn. Sample i depends only on (size, seed, i).
std::vector<VesselSample> GenerateVessels(std::size_t n, std::size_t size,
                                          std::uint64_t seed);

enum class LesionMode { kBinary, kQuadrant };
std::string_view LesionModeName(LesionMode mode);

// Quadrants: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
struct LesionMeta {
  std::uint64_t seed = 0;
  std::size_t index = 0;
  int quadrant = -1;  // -1 when no lesion
  double center_y = 0.0;
  double center_x = 0.0;
  double sigma = 0.0;
  double amplitude = 0.0;
};

struct LesionSample {
  Tensor image;  // [1,H,W]
  int label = 0;
  LesionMeta meta;
};

// size >= 32 and divisible by 8. Binary mode: odd indices are positives
// (floor(n/2) of them) carrying one Gaussian blob in a random quadrant.
// Quadrant mode: every image has a blob and label = quadrant = index % 4;
// n must be a multiple of 4.
std::vector<LesionSample> GenerateLesions(std::size_t n, std::size_t size,
                                          LesionMode mode, std::uint64_t seed);

// Selection mask [H,W] of quadrant q of a size x size image.
ops::Mask QuadrantMask(std::size_t size, int quadrant);

// Pixels of `mask` ([1,H,W] or [H,W], values 0/1) that lie inside some fully
// foreground 3x3 window; a morphological opening with a 3x3 square.
ops::Mask ThickSupport(const Tensor& mask);

}  // namespace olens

#endif  // OLENS_SYNTH_HPP_
