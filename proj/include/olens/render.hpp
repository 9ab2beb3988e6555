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


#ifndef OLENS_RENDER_HPP_
#define OLENS_RENDER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "olens/tensor.hpp"

namespace olens {

enum class Colormap { kGray, kInferno };

// Color for value v in [0,1]: table entry round(255 v). The inferno table is
// the 256-entry inferno map in src/inferno_table.inc.
std::array<std::uint8_t, 3> ColormapLookup(Colormap map, double v);

// map: [H,W] or [1,H,W] with values in [0,1]. Returns RGB [3,H,W] in [0,1],
// each value an exact multiple of 1/255. Throws RangeError outside [0,1].
Tensor RenderHeatmap(const Tensor& map, Colormap colormap);

// Per pixel: (1 - alpha*m) * base + alpha*m * heat(m), with base replicated
// to RGB and heat from the inferno table.
Tensor RenderOverlay(const Tensor& base, const Tensor& map, double alpha);

// Places [3,H,W] tiles left to right separated by white columns of width
// `separator`.
Tensor TileHorizontal(const std::vector<Tensor>& tiles, std::size_t separator = 2);

}  // namespace olens

#endif  // OLENS_RENDER_HPP_
