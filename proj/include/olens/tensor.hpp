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

#ifndef OLENS_TENSOR_HPP_
#define OLENS_TENSOR_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace olens {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major array of doubles with an optional gradient slot.
//
// Copies are shallow: two Tensor values may refer to the same storage, which
// is how the tape and the network share parameters. Values are fixed after
// construction; only optimizers (via MutableData) and the backward pass (via
// the grad slot) write to an existing tensor.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value, bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t i) const { return shape().at(i); }
  std::size_t size() const;

  std::span<const double> data() const;
  std::span<double> MutableData();
  double operator[](std::size_t i) const { return data()[i]; }
  // Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool value);

  bool has_grad() const;
  std::span<const double> grad() const;
  void set_grad(std::vector<double> grad);
  void clear_grad();

  // Shares values with this tensor but never requires a gradient.
  Tensor Detach() const;
  // Deep copy of the values; the copy has no gradient.
  Tensor Clone() const;
  // Same values viewed under another shape of equal element count.
  Tensor Reshaped(Shape shape) const;

  // Identity of the underlying tensor object (not of the value buffer).
  const void* id() const { return impl_.get(); }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// True when every element is finite.
bool AllFinite(std::span<const double> values);

}  // namespace olens

#endif  // OLENS_TENSOR_HPP_
