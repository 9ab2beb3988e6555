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


#include "olens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "olens/error.hpp"
#include "olens/rng.hpp"

namespace olens {
namespace {

void CheckSize(std::size_t size, std::size_t divisor) {
  if (size < 32 || size % divisor != 0) {
    throw Error(ErrorCode::kBadSize,
                "size must be >= 32 and divisible by " + std::to_string(divisor) +
                    ", got " + std::to_string(size));
  }
}

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct Stroke {
  int width;
  std::vector<std::size_t> pixels;
};

Stroke DrawStroke(RngStream& rng, std::size_t size, int width) {
  const double s = static_cast<double>(size);
  double x = s * (0.1 + 0.8 * rng.Uniform());
  double y = s * (0.1 + 0.8 * rng.Uniform());
  double heading = 2.0 * std::numbers::pi * rng.Uniform();
  const double length = s * (0.5 + 0.7 * rng.Uniform());
  const double turn = 0.06 + 0.06 * rng.Uniform();
  const int steps = static_cast<int>(length / 0.5);

  Stroke stroke{width, {}};
  std::vector<std::uint8_t> hit(size * size, 0);
  for (int k = 0; k < steps; ++k) {
    const auto x0 = static_cast<long>(std::floor(x - width / 2.0 + 0.5));
    const auto y0 = static_cast<long>(std::floor(y - width / 2.0 + 0.5));
    for (long dy = 0; dy < width; ++dy) {
      for (long dx = 0; dx < width; ++dx) {
        const long px = x0 + dx, py = y0 + dy;
        if (px < 0 || py < 0 || px >= static_cast<long>(size) ||
            py >= static_cast<long>(size)) {
          continue;
        }
        const std::size_t i = static_cast<std::size_t>(py) * size + static_cast<std::size_t>(px);
        if (!hit[i]) {
          hit[i] = 1;
          stroke.pixels.push_back(i);
        }
      }
    }
    heading += rng.Normal(0.0, turn);
    x += 0.5 * std::cos(heading);
    y += 0.5 * std::sin(heading);
    if (x < 0.0 || y < 0.0 || x >= s || y >= s) break;
  }
  return stroke;
}

VesselSample DrawVesselImage(RngStream& rng, std::size_t size) {
  const std::size_t n_pix = size * size;
  const std::size_t n_strokes = 3 + rng.UniformInt(3);
  std::vector<Stroke> strokes;
  for (std::size_t k = 0; k < n_strokes; ++k) {
    int width;
    if (k == 0) {
      width = 1 + static_cast<int>(rng.UniformInt(2));
    } else if (k == 1) {
      width = 3 + static_cast<int>(rng.UniformInt(2));
    } else {
      width = 1 + static_cast<int>(rng.UniformInt(4));
    }
    strokes.push_back(DrawStroke(rng, size, width));
  }

  VesselSample out;
  out.meta.n_strokes = n_strokes;
  out.meta.width_class.assign(n_pix, WidthClass::kBackground);
  std::vector<double> mask(n_pix, 0.0);
  for (const Stroke& st : strokes) {
    out.meta.stroke_widths.push_back(st.width);
    const auto cls = st.width <= 2 ? WidthClass::kThin : WidthClass::kThick;
    for (std::size_t i : st.pixels) {
      mask[i] = 1.0;
      auto& wc = out.meta.width_class[i];
      if (wc == WidthClass::kBackground) {
        wc = cls;
      } else if (wc != cls) {
        wc = WidthClass::kMixed;
      }
    }
  }
  for (WidthClass wc : out.meta.width_class) {
    out.meta.thin_pixels += wc == WidthClass::kThin ? 1 : 0;
    out.meta.thick_pixels += wc == WidthClass::kThick ? 1 : 0;
  }

  const double base = 0.55 + 0.2 * rng.Uniform();
  const double gx = 0.3 * (rng.Uniform() - 0.5);
  const double gy = 0.3 * (rng.Uniform() - 0.5);
  const double denom = static_cast<double>(size - 1);
  std::vector<double> image(n_pix);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const std::size_t i = y * size + x;
      const double bg = base + gx * (x / denom - 0.5) + gy * (y / denom - 0.5);
      image[i] = Clamp01(bg - kVesselContrast * mask[i] +
                         rng.Normal(0.0, kVesselNoiseSigma));
    }
  }
  out.image = Tensor({1, size, size}, std::move(image));
  out.mask = Tensor({1, size, size}, std::move(mask));
  return out;
}

}  // namespace

std::vector<VesselSample> GenerateVessels(std::size_t n, std::size_t size,
                                          std::uint64_t seed) {
  CheckSize(size, 4);
  std::vector<VesselSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = RngStream::Substream(seed, i);
    for (;;) {
      VesselSample s = DrawVesselImage(rng, size);
      double fg = 0.0;
      for (double v : s.mask.data()) fg += v;
      fg /= static_cast<double>(size * size);
      if (fg < kMinForeground || fg > kMaxForeground || s.meta.thin_pixels == 0 ||
          s.meta.thick_pixels == 0) {
        continue;
      }
      s.meta.seed = seed;
      s.meta.index = i;
      out.push_back(std::move(s));
      break;
    }
  }
  return out;
}

std::string_view LesionModeName(LesionMode mode) {
  return mode == LesionMode::kBinary ? "binary" : "quadrant";
}

std::vector<LesionSample> GenerateLesions(std::size_t n, std::size_t size,
                                          LesionMode mode, std::uint64_t seed) {
  CheckSize(size, 8);
  if (mode == LesionMode::kQuadrant && n % 4 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "quadrant mode needs n divisible by 4, got " + std::to_string(n));
  }
  const double s = static_cast<double>(size);
  const double half = s / 2.0;
  const double margin = s / 8.0;
  std::vector<LesionSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = RngStream::Substream(seed, i);
    LesionSample sample;
    sample.meta.seed = seed;
    sample.meta.index = i;

    // Low-frequency texture: a few random plane waves.
    double fx[3], fy[3], phase[3], amp[3];
    for (int k = 0; k < 3; ++k) {
      const double freq = (1.0 + 2.0 * rng.Uniform()) * 2.0 * std::numbers::pi / s;
      const double dir = 2.0 * std::numbers::pi * rng.Uniform();
      fx[k] = freq * std::cos(dir);
      fy[k] = freq * std::sin(dir);
      phase[k] = 2.0 * std::numbers::pi * rng.Uniform();
      amp[k] = 0.03 + 0.03 * rng.Uniform();
    }
    const double base = 0.35 + 0.1 * rng.Uniform();

    bool positive = mode == LesionMode::kQuadrant || i % 2 == 1;
    if (positive) {
      const int q = mode == LesionMode::kQuadrant ? static_cast<int>(i % 4)
                                                  : static_cast<int>(rng.UniformInt(4));
      const double qy = (q / 2) * half, qx = (q % 2) * half;
      sample.meta.quadrant = q;
      sample.meta.center_y = qy + margin + (half - 2.0 * margin) * rng.Uniform();
      sample.meta.center_x = qx + margin + (half - 2.0 * margin) * rng.Uniform();
      sample.meta.sigma = s * (0.06 + 0.04 * rng.Uniform());
      sample.meta.amplitude =
          kLesionMinContrast + (kLesionMaxContrast - kLesionMinContrast) * rng.Uniform();
    }
    sample.label = mode == LesionMode::kQuadrant ? sample.meta.quadrant
                                                 : (positive ? 1 : 0);

    std::vector<double> image(size * size);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        // Pixel centers sit at integer + 0.5.
        const double py = y + 0.5, px = x + 0.5;
        double v = base;
        for (int k = 0; k < 3; ++k) v += amp[k] * std::sin(fx[k] * px + fy[k] * py + phase[k]);
        if (positive) {
          const double dy = py - sample.meta.center_y, dx = px - sample.meta.center_x;
          v += sample.meta.amplitude *
               std::exp(-(dx * dx + dy * dy) / (2.0 * sample.meta.sigma * sample.meta.sigma));
        }
        v += rng.Normal(0.0, kLesionNoiseSigma);
        image[y * size + x] = Clamp01(v);
      }
    }
    sample.image = Tensor({1, size, size}, std::move(image));
    out.push_back(std::move(sample));
  }
  return out;
}

ops::Mask QuadrantMask(std::size_t size, int quadrant) {
  if (quadrant < 0 || quadrant > 3) {
    throw Error(ErrorCode::kIndexOutOfRange, "quadrant must be 0..3");
  }
  const std::size_t half = size / 2;
  const std::size_t y0 = (quadrant / 2) * half, x0 = (quadrant % 2) * half;
  ops::Mask mask(size * size, 0);
  for (std::size_t y = y0; y < y0 + half; ++y) {
    for (std::size_t x = x0; x < x0 + half; ++x) mask[y * size + x] = 1;
  }
  return mask;
}

ops::Mask ThickSupport(const Tensor& mask) {
  const std::size_t h = mask.rank() == 3 ? mask.dim(1) : mask.dim(0);
  const std::size_t w = mask.rank() == 3 ? mask.dim(2) : mask.dim(1);
  ops::Mask out(h * w, 0);
  for (std::size_t y = 0; y + 2 < h; ++y) {
    for (std::size_t x = 0; x + 2 < w; ++x) {
      bool full = true;
      for (std::size_t dy = 0; dy < 3 && full; ++dy) {
        for (std::size_t dx = 0; dx < 3 && full; ++dx) {
          full = mask[(y + dy) * w + x + dx] > 0.5;
        }
      }
      if (!full) continue;
      for (std::size_t dy = 0; dy < 3; ++dy) {
        for (std::size_t dx = 0; dx < 3; ++dx) out[(y + dy) * w + x + dx] = 1;
      }
    }
  }
  return out;
}

}  // namespace olens
