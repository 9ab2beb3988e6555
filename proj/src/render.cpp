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


#include "olens/render.hpp"

#include <cmath>
#include <string>

#include "olens/error.hpp"
#include "olens/image_io.hpp"

namespace olens {
namespace {

constexpr std::uint8_t kInferno[256][3] = {
#include "inferno_table.inc"
};

void CheckUnit(const Tensor& map, const char* what) {
  for (double v : map.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kRangeError,
                  std::string(what) + " value outside [0,1]: " + std::to_string(v));
    }
  }
}

std::pair<std::size_t, std::size_t> Spatial(const Tensor& t) {
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  if (t.rank() == 3 && t.dim(0) == 1) return {t.dim(1), t.dim(2)};
  throw Error(ErrorCode::kShapeMismatch,
              "expected [H,W] or [1,H,W], got " + ShapeToString(t.shape()));
}

}  // namespace

std::array<std::uint8_t, 3> ColormapLookup(Colormap map, double v) {
  const std::uint8_t idx = QuantizeUnit(v);
  if (map == Colormap::kGray) return {idx, idx, idx};
  return {kInferno[idx][0], kInferno[idx][1], kInferno[idx][2]};
}

Tensor RenderHeatmap(const Tensor& map, Colormap colormap) {
  CheckUnit(map, "heatmap");
  const auto [h, w] = Spatial(map);
  const std::size_t plane = h * w;
  std::vector<double> rgb(3 * plane);
  for (std::size_t i = 0; i < plane; ++i) {
    const auto c = ColormapLookup(colormap, map[i]);
    for (std::size_t ch = 0; ch < 3; ++ch) rgb[ch * plane + i] = c[ch] / 255.0;
  }
  return Tensor({3, h, w}, std::move(rgb));
}

Tensor RenderOverlay(const Tensor& base, const Tensor& map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kRangeError, "alpha must lie in [0,1]");
  }
  CheckUnit(base, "overlay base");
  CheckUnit(map, "overlay map");
  const auto [h, w] = Spatial(base);
  if (Spatial(map) != std::make_pair(h, w)) {
    throw Error(ErrorCode::kShapeMismatch, "overlay base and map differ in size");
  }
  const std::size_t plane = h * w;
  std::vector<double> rgb(3 * plane);
  for (std::size_t i = 0; i < plane; ++i) {
    const double m = alpha * map[i];
    const auto heat = ColormapLookup(Colormap::kInferno, map[i]);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      rgb[ch * plane + i] = (1.0 - m) * base[i] + m * (heat[ch] / 255.0);
    }
  }
  return Tensor({3, h, w}, std::move(rgb));
}

Tensor TileHorizontal(const std::vector<Tensor>& tiles, std::size_t separator) {
  if (tiles.empty()) throw Error(ErrorCode::kInvalidArgument, "no tiles");
  const std::size_t h = tiles[0].dim(1);
  std::size_t total_w = separator * (tiles.size() - 1);
  for (const Tensor& t : tiles) {
    if (t.rank() != 3 || t.dim(0) != 3 || t.dim(1) != h) {
      throw Error(ErrorCode::kShapeMismatch, "tiles must be [3,H,W] of equal H");
    }
    total_w += t.dim(2);
  }
  std::vector<double> out(3 * h * total_w, 1.0);
  std::size_t x0 = 0;
  for (const Tensor& t : tiles) {
    const std::size_t w = t.dim(2);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          out[(c * h + y) * total_w + x0 + x] = t[(c * h + y) * w + x];
        }
      }
    }
    x0 += w + separator;
  }
  return Tensor({3, h, total_w}, std::move(out));
}

}  // namespace olens
