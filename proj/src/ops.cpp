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


#include "olens/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "olens/error.hpp"

namespace olens::ops {
namespace {

Tensor Finish(std::vector<double> values, Shape shape, const char* op) {
  if (!AllFinite(values)) {
    throw Error(ErrorCode::kNonFinite,
                std::string(op) + " produced a non-finite value");
  }
  return Tensor(std::move(shape), std::move(values));
}

void RequireRank(const Tensor& t, std::size_t rank, const char* what) {
  if (!t.defined() || t.rank() != rank) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " must have rank " + std::to_string(rank) +
                    ", got " + ShapeToString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + ShapeToString(a.shape()) + " vs " +
                    ShapeToString(b.shape()));
  }
}

bool Recording(Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (tape->NeedsGrad(*t)) return true;
  }
  return false;
}

struct ConvGeometry {
  std::size_t c_in, h, w, c_out, kh, kw, stride, pad, h_out, w_out;
  std::size_t rows() const { return c_in * kh * kw; }
  std::size_t cols() const { return h_out * w_out; }
};

// cols[r][p] with r = (ci*kh + ky)*kw + kx and p = oy*w_out + ox.
std::vector<double> Im2Col(std::span<const double> in, const ConvGeometry& g) {
  std::vector<double> cols(g.rows() * g.cols(), 0.0);
  const std::size_t P = g.cols();
  for (std::size_t ci = 0; ci < g.c_in; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        double* row = &cols[((ci * g.kh + ky) * g.kw + kx) * P];
        for (std::size_t oy = 0; oy < g.h_out; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          const double* src = &in[(ci * g.h + static_cast<std::size_t>(iy)) * g.w];
          double* dst = row + oy * g.w_out;
          for (std::size_t ox = 0; ox < g.w_out; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            dst[ox] = src[ix];
          }
        }
      }
    }
  }
  return cols;
}

void Col2ImAdd(std::span<const double> cols, const ConvGeometry& g,
               std::vector<double>& out) {
  const std::size_t P = g.cols();
  for (std::size_t ci = 0; ci < g.c_in; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const double* row = &cols[((ci * g.kh + ky) * g.kw + kx) * P];
        for (std::size_t oy = 0; oy < g.h_out; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          double* dst = &out[(ci * g.h + static_cast<std::size_t>(iy)) * g.w];
          const double* src = row + oy * g.w_out;
          for (std::size_t ox = 0; ox < g.w_out; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor Conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t padding, Tape* tape) {
  RequireRank(input, 3, "conv2d input");
  RequireRank(kernels, 4, "conv2d kernels");
  RequireRank(bias, 1, "conv2d bias");
  if (stride == 0) {
    throw Error(ErrorCode::kInvalidArgument, "conv2d stride must be positive");
  }
  ConvGeometry g{};
  g.c_in = input.dim(0);
  g.h = input.dim(1);
  g.w = input.dim(2);
  g.c_out = kernels.dim(0);
  g.kh = kernels.dim(2);
  g.kw = kernels.dim(3);
  g.stride = stride;
  g.pad = padding;
  if (kernels.dim(1) != g.c_in || bias.dim(0) != g.c_out) {
    throw Error(ErrorCode::kShapeMismatch,
                "conv2d input " + ShapeToString(input.shape()) + ", kernels " +
                    ShapeToString(kernels.shape()) + ", bias " +
                    ShapeToString(bias.shape()));
  }
  const std::size_t hp = g.h + 2 * padding;
  const std::size_t wp = g.w + 2 * padding;
  if (g.kh > hp || g.kw > wp) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d kernel larger than input");
  }
  if ((hp - g.kh) % stride != 0 || (wp - g.kw) % stride != 0) {
    throw Error(ErrorCode::kNonIntegralOutputSize,
                "stride " + std::to_string(stride) +
                    " does not divide the padded input extent");
  }
  g.h_out = (hp - g.kh) / stride + 1;
  g.w_out = (wp - g.kw) / stride + 1;

  auto cols = std::make_shared<std::vector<double>>(Im2Col(input.data(), g));
  const std::size_t R = g.rows();
  const std::size_t P = g.cols();
  const auto k = kernels.data();
  const auto b = bias.data();
  std::vector<double> out(g.c_out * P);
  for (std::size_t co = 0; co < g.c_out; ++co) {
    double* dst = &out[co * P];
    std::fill(dst, dst + P, b[co]);
    for (std::size_t r = 0; r < R; ++r) {
      const double kv = k[co * R + r];
      const double* src = &(*cols)[r * P];
      for (std::size_t p = 0; p < P; ++p) dst[p] += kv * src[p];
    }
  }
  Tensor result = Finish(std::move(out), {g.c_out, g.h_out, g.w_out}, "conv2d");

  if (Recording(tape, {&input, &kernels, &bias})) {
    tape->Record(
        "conv2d", {input, kernels, bias}, result,
        [g, cols, kernels](const BackwardContext& ctx) {
          const std::size_t R = g.rows();
          const std::size_t P = g.cols();
          const auto gout = ctx.output_grad;
          if (auto* db = ctx.inputs[2]) {
            for (std::size_t co = 0; co < g.c_out; ++co) {
              double s = 0.0;
              for (std::size_t p = 0; p < P; ++p) s += gout[co * P + p];
              (*db)[co] += s;
            }
          }
          if (auto* dk = ctx.inputs[1]) {
            for (std::size_t co = 0; co < g.c_out; ++co) {
              const double* gr = &gout[co * P];
              for (std::size_t r = 0; r < R; ++r) {
                const double* cr = &(*cols)[r * P];
                double s = 0.0;
                for (std::size_t p = 0; p < P; ++p) s += gr[p] * cr[p];
                (*dk)[co * R + r] += s;
              }
            }
          }
          if (auto* dx = ctx.inputs[0]) {
            const auto kd = kernels.data();
            std::vector<double> dcols(R * P, 0.0);
            for (std::size_t co = 0; co < g.c_out; ++co) {
              const double* gr = &gout[co * P];
              for (std::size_t r = 0; r < R; ++r) {
                const double kv = kd[co * R + r];
                double* dst = &dcols[r * P];
                for (std::size_t p = 0; p < P; ++p) dst[p] += kv * gr[p];
              }
            }
            Col2ImAdd(dcols, g, *dx);
          }
        });
  }
  return result;
}

Tensor MaxPool2d(const Tensor& input, Tape* tape) {
  RequireRank(input, 3, "max_pool2d input");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % 2 != 0 || w % 2 != 0) {
    throw Error(ErrorCode::kOddSpatialDim,
                "max_pool2d needs even spatial dims, got " +
                    ShapeToString(input.shape()));
  }
  const std::size_t ho = h / 2, wo = w / 2;
  const auto x = input.data();
  std::vector<double> out(c * ho * wo);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        const std::size_t base = (ch * h + 2 * oy) * w + 2 * ox;
        const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = cand[0];
        for (int i = 1; i < 4; ++i) {
          if (x[cand[i]] > x[best]) best = cand[i];
        }
        const std::size_t o = (ch * ho + oy) * wo + ox;
        out[o] = x[best];
        (*argmax)[o] = best;
      }
    }
  }
  Tensor result = Finish(std::move(out), {c, ho, wo}, "max_pool2d");
  if (Recording(tape, {&input})) {
    tape->Record("max_pool2d", {input}, result,
                 [argmax](const BackwardContext& ctx) {
                   auto& dx = *ctx.inputs[0];
                   for (std::size_t o = 0; o < argmax->size(); ++o) {
                     dx[(*argmax)[o]] += ctx.output_grad[o];
                   }
                 });
  }
  return result;
}

Tensor Upsample2dNearest(const Tensor& input, Tape* tape) {
  RequireRank(input, 3, "upsample2d input");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t w2 = 2 * w;
  const auto x = input.data();
  std::vector<double> out(c * 4 * h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < 2 * h; ++y) {
      const double* src = &x[(ch * h + y / 2) * w];
      double* dst = &out[(ch * 2 * h + y) * w2];
      for (std::size_t xx = 0; xx < w2; ++xx) dst[xx] = src[xx / 2];
    }
  }
  Tensor result = Finish(std::move(out), {c, 2 * h, w2}, "upsample2d");
  if (Recording(tape, {&input})) {
    tape->Record("upsample2d", {input}, result,
                 [c, h, w](const BackwardContext& ctx) {
                   auto& dx = *ctx.inputs[0];
                   const std::size_t w2 = 2 * w;
                   for (std::size_t ch = 0; ch < c; ++ch) {
                     for (std::size_t y = 0; y < 2 * h; ++y) {
                       const double* g = &ctx.output_grad[(ch * 2 * h + y) * w2];
                       double* dst = &dx[(ch * h + y / 2) * w];
                       for (std::size_t xx = 0; xx < w2; ++xx) dst[xx / 2] += g[xx];
                     }
                   }
                 });
  }
  return result;
}

Tensor Activate(const Tensor& input, Activation kind, Tape* tape) {
  const auto x = input.data();
  std::vector<double> out(x.size());
  if (kind == Activation::kRelu) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] >= 0.0) {
        out[i] = 1.0 / (1.0 + std::exp(-x[i]));
      } else {
        const double e = std::exp(x[i]);
        out[i] = e / (1.0 + e);
      }
    }
  }
  Tensor result = Finish(std::move(out), input.shape(),
                         kind == Activation::kRelu ? "relu" : "sigmoid");
  if (Recording(tape, {&input})) {
    if (kind == Activation::kRelu) {
      tape->Record("relu", {input}, result, [input](const BackwardContext& ctx) {
        const auto x = input.data();
        auto& dx = *ctx.inputs[0];
        const bool guided = ctx.relu_mode == ReluBackwardMode::kGuided;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double g = ctx.output_grad[i];
          if (x[i] > 0.0 && (!guided || g > 0.0)) dx[i] += g;
        }
      });
    } else {
      tape->Record("sigmoid", {input}, result,
                   [result](const BackwardContext& ctx) {
                     const auto y = result.data();
                     auto& dx = *ctx.inputs[0];
                     for (std::size_t i = 0; i < y.size(); ++i) {
                       dx[i] += ctx.output_grad[i] * y[i] * (1.0 - y[i]);
                     }
                   });
    }
  }
  return result;
}

Tensor Dense(const Tensor& input, const Tensor& weights, const Tensor& bias,
             Tape* tape) {
  RequireRank(input, 1, "dense input");
  RequireRank(weights, 2, "dense weights");
  RequireRank(bias, 1, "dense bias");
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  if (input.dim(0) != n || bias.dim(0) != m) {
    throw Error(ErrorCode::kShapeMismatch,
                "dense input " + ShapeToString(input.shape()) + ", weights " +
                    ShapeToString(weights.shape()) + ", bias " +
                    ShapeToString(bias.shape()));
  }
  const auto x = input.data();
  const auto wt = weights.data();
  const auto b = bias.data();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += wt[i * n + j] * x[j];
    out[i] = s + b[i];
  }
  Tensor result = Finish(std::move(out), {m}, "dense");
  if (Recording(tape, {&input, &weights, &bias})) {
    tape->Record("dense", {input, weights, bias}, result,
                 [input, weights, m, n](const BackwardContext& ctx) {
                   const auto g = ctx.output_grad;
                   if (auto* dx = ctx.inputs[0]) {
                     const auto wt = weights.data();
                     for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < n; ++j) {
                         (*dx)[j] += wt[i * n + j] * g[i];
                       }
                     }
                   }
                   if (auto* dw = ctx.inputs[1]) {
                     const auto x = input.data();
                     for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < n; ++j) {
                         (*dw)[i * n + j] += g[i] * x[j];
                       }
                     }
                   }
                   if (auto* db = ctx.inputs[2]) {
                     for (std::size_t i = 0; i < m; ++i) (*db)[i] += g[i];
                   }
                 });
  }
  return result;
}

Tensor Dropout(const Tensor& input, double rate, RngStream& rng, bool active,
               Tape* tape) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kInvalidRate,
                "dropout rate must lie in [0,1), got " + std::to_string(rate));
  }
  const auto x = input.data();
  auto scale = std::make_shared<std::vector<double>>(x.size(), 1.0);
  if (active) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& s : *scale) s = rng.Uniform() < rate ? 0.0 : keep_scale;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * (*scale)[i];
  Tensor result = Finish(std::move(out), input.shape(), "dropout");
  if (Recording(tape, {&input})) {
    tape->Record("dropout", {input}, result, [scale](const BackwardContext& ctx) {
      auto& dx = *ctx.inputs[0];
      for (std::size_t i = 0; i < dx.size(); ++i) {
        dx[i] += ctx.output_grad[i] * (*scale)[i];
      }
    });
  }
  return result;
}

Tensor Reduce(const Tensor& input, ReduceKind kind, const Mask* mask,
              Tape* tape) {
  const auto x = input.data();
  if (mask != nullptr && mask->size() != x.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "reduce mask has " + std::to_string(mask->size()) +
                    " entries for " + std::to_string(x.size()) + " elements");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask == nullptr || (*mask)[i]) {
      sum += x[i];
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyRegion, "reduce mask selects no element");
  }
  const double weight = kind == ReduceKind::kMean ? 1.0 / count : 1.0;
  Tensor result = Finish({kind == ReduceKind::kMean ? sum / count : sum}, {1},
                         "reduce");
  if (Recording(tape, {&input})) {
    std::shared_ptr<const Mask> saved =
        mask ? std::make_shared<const Mask>(*mask) : nullptr;
    tape->Record("reduce", {input}, result,
                 [saved, weight](const BackwardContext& ctx) {
                   auto& dx = *ctx.inputs[0];
                   const double g = ctx.output_grad[0] * weight;
                   for (std::size_t i = 0; i < dx.size(); ++i) {
                     if (!saved || (*saved)[i]) dx[i] += g;
                   }
                 });
  }
  return result;
}

Tensor ConcatChannels(const Tensor& a, const Tensor& b, Tape* tape) {
  RequireRank(a, 3, "concat input");
  RequireRank(b, 3, "concat input");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch,
                "concat spatial dims differ: " + ShapeToString(a.shape()) +
                    " vs " + ShapeToString(b.shape()));
  }
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const std::size_t na = a.size();
  Tensor result =
      Finish(std::move(out), {a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, "concat");
  if (Recording(tape, {&a, &b})) {
    tape->Record("concat", {a, b}, result, [na](const BackwardContext& ctx) {
      const auto g = ctx.output_grad;
      if (auto* da = ctx.inputs[0]) {
        for (std::size_t i = 0; i < na; ++i) (*da)[i] += g[i];
      }
      if (auto* db = ctx.inputs[1]) {
        for (std::size_t i = 0; i < db->size(); ++i) (*db)[i] += g[na + i];
      }
    });
  }
  return result;
}

Tensor Reshape(const Tensor& input, Shape shape, Tape* tape) {
  Tensor result = input.Reshaped(std::move(shape));
  if (Recording(tape, {&input})) {
    tape->Record("reshape", {input}, result, [](const BackwardContext& ctx) {
      auto& dx = *ctx.inputs[0];
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ctx.output_grad[i];
    });
  }
  return result;
}

Tensor Softmax(const Tensor& input, Tape* tape) {
  RequireRank(input, 1, "softmax input");
  const auto x = input.data();
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    z += out[i];
  }
  for (double& v : out) v /= z;
  Tensor result = Finish(std::move(out), input.shape(), "softmax");
  if (Recording(tape, {&input})) {
    tape->Record("softmax", {input}, result, [result](const BackwardContext& ctx) {
      const auto y = result.data();
      const auto g = ctx.output_grad;
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
      auto& dx = *ctx.inputs[0];
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += y[i] * (g[i] - dot);
    });
  }
  return result;
}

Tensor Add(const Tensor& a, const Tensor& b, Tape* tape) {
  RequireSameShape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  Tensor result = Finish(std::move(out), a.shape(), "add");
  if (Recording(tape, {&a, &b})) {
    tape->Record("add", {a, b}, result, [](const BackwardContext& ctx) {
      for (auto* d : ctx.inputs) {
        if (!d) continue;
        for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += ctx.output_grad[i];
      }
    });
  }
  return result;
}

Tensor Sub(const Tensor& a, const Tensor& b, Tape* tape) {
  RequireSameShape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  Tensor result = Finish(std::move(out), a.shape(), "sub");
  if (Recording(tape, {&a, &b})) {
    tape->Record("sub", {a, b}, result, [](const BackwardContext& ctx) {
      if (auto* da = ctx.inputs[0]) {
        for (std::size_t i = 0; i < da->size(); ++i) (*da)[i] += ctx.output_grad[i];
      }
      if (auto* db = ctx.inputs[1]) {
        for (std::size_t i = 0; i < db->size(); ++i) (*db)[i] -= ctx.output_grad[i];
      }
    });
  }
  return result;
}

Tensor Mul(const Tensor& a, const Tensor& b, Tape* tape) {
  RequireSameShape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  Tensor result = Finish(std::move(out), a.shape(), "mul");
  if (Recording(tape, {&a, &b})) {
    tape->Record("mul", {a, b}, result, [a, b](const BackwardContext& ctx) {
      const auto g = ctx.output_grad;
      if (auto* da = ctx.inputs[0]) {
        for (std::size_t i = 0; i < da->size(); ++i) (*da)[i] += g[i] * b[i];
      }
      if (auto* db = ctx.inputs[1]) {
        for (std::size_t i = 0; i < db->size(); ++i) (*db)[i] += g[i] * a[i];
      }
    });
  }
  return result;
}

Tensor Div(const Tensor& a, const Tensor& b, Tape* tape) {
  RequireSameShape(a, b, "div");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / b[i];
  Tensor result = Finish(std::move(out), a.shape(), "div");
  if (Recording(tape, {&a, &b})) {
    tape->Record("div", {a, b}, result, [a, b](const BackwardContext& ctx) {
      const auto g = ctx.output_grad;
      if (auto* da = ctx.inputs[0]) {
        for (std::size_t i = 0; i < da->size(); ++i) (*da)[i] += g[i] / b[i];
      }
      if (auto* db = ctx.inputs[1]) {
        for (std::size_t i = 0; i < db->size(); ++i) {
          (*db)[i] -= g[i] * a[i] / (b[i] * b[i]);
        }
      }
    });
  }
  return result;
}

Tensor Scale(const Tensor& input, double factor, Tape* tape) {
  std::vector<double> out(input.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = input[i] * factor;
  Tensor result = Finish(std::move(out), input.shape(), "scale");
  if (Recording(tape, {&input})) {
    tape->Record("scale", {input}, result, [factor](const BackwardContext& ctx) {
      auto& dx = *ctx.inputs[0];
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ctx.output_grad[i] * factor;
    });
  }
  return result;
}

Tensor AddScalar(const Tensor& input, double value, Tape* tape) {
  std::vector<double> out(input.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = input[i] + value;
  Tensor result = Finish(std::move(out), input.shape(), "add_scalar");
  if (Recording(tape, {&input})) {
    tape->Record("add_scalar", {input}, result, [](const BackwardContext& ctx) {
      auto& dx = *ctx.inputs[0];
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ctx.output_grad[i];
    });
  }
  return result;
}

Tensor Log(const Tensor& input, Tape* tape) {
  std::vector<double> out(input.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(input[i]);
  Tensor result = Finish(std::move(out), input.shape(), "log");
  if (Recording(tape, {&input})) {
    tape->Record("log", {input}, result, [input](const BackwardContext& ctx) {
      auto& dx = *ctx.inputs[0];
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ctx.output_grad[i] / input[i];
    });
  }
  return result;
}

Tensor Select(const Tensor& input, std::size_t index, Tape* tape) {
  if (index >= input.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "index " + std::to_string(index) + " outside tensor of size " +
                    std::to_string(input.size()));
  }
  Tensor result = Finish({input[index]}, {1}, "select");
  if (Recording(tape, {&input})) {
    tape->Record("select", {input}, result, [index](const BackwardContext& ctx) {
      (*ctx.inputs[0])[index] += ctx.output_grad[0];
    });
  }
  return result;
}

}  // namespace olens::ops
