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


#ifndef OLENS_OPS_HPP_
#define OLENS_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "olens/rng.hpp"
#include "olens/tape.hpp"
#include "olens/tensor.hpp"

// Differentiable tensor operations. Each takes an optional tape; when the tape
// is non-null and some operand needs a gradient, the operation is recorded.
namespace olens::ops {

// Per-element selection flags (nonzero = selected), same length as the tensor.
using Mask = std::vector<std::uint8_t>;

enum class Activation { kRelu, kSigmoid };
enum class ReduceKind { kSum, kMean };

// Cross-correlation (no kernel flip) of input [C_in,H,W] with kernels
// [C_out,C_in,kH,kW] plus bias [C_out].
Tensor Conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t padding, Tape* tape = nullptr);

// 2x2 max pooling with stride 2. Ties resolve to the first cell in row-major
// order within the window; backward routes the gradient only to that cell.
Tensor MaxPool2d(const Tensor& input, Tape* tape = nullptr);

// Nearest-neighbour 2x upsampling of [C,H,W].
Tensor Upsample2dNearest(const Tensor& input, Tape* tape = nullptr);

Tensor Activate(const Tensor& input, Activation kind, Tape* tape = nullptr);
inline Tensor Relu(const Tensor& input, Tape* tape = nullptr) {
  return Activate(input, Activation::kRelu, tape);
}
inline Tensor Sigmoid(const Tensor& input, Tape* tape = nullptr) {
  return Activate(input, Activation::kSigmoid, tape);
}

// weights [M,N] times input [N] plus bias [M].
Tensor Dense(const Tensor& input, const Tensor& weights, const Tensor& bias,
             Tape* tape = nullptr);

// Inverted dropout: when active, each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate). The mask drawn from `rng` is
// reused by the backward pass.
Tensor Dropout(const Tensor& input, double rate, RngStream& rng, bool active,
               Tape* tape = nullptr);

// Sum or mean over the selected elements (all elements when mask is null).
Tensor Reduce(const Tensor& input, ReduceKind kind, const Mask* mask = nullptr,
              Tape* tape = nullptr);

// Channel concatenation of [Ca,H,W] and [Cb,H,W].
Tensor ConcatChannels(const Tensor& a, const Tensor& b, Tape* tape = nullptr);

Tensor Reshape(const Tensor& input, Shape shape, Tape* tape = nullptr);

// Numerically stable softmax over all elements of a rank-1 tensor.
Tensor Softmax(const Tensor& input, Tape* tape = nullptr);

// Elementwise arithmetic on equal shapes.
Tensor Add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor Sub(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor Mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor Div(const Tensor& a, const Tensor& b, Tape* tape = nullptr);

Tensor Scale(const Tensor& input, double factor, Tape* tape = nullptr);
Tensor AddScalar(const Tensor& input, double value, Tape* tape = nullptr);
Tensor Log(const Tensor& input, Tape* tape = nullptr);

// Element `index` as a one-element tensor.
Tensor Select(const Tensor& input, std::size_t index, Tape* tape = nullptr);

}  // namespace olens::ops

#endif  // OLENS_OPS_HPP_
