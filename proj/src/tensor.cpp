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

#include "olens/tensor.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "olens/error.hpp"

namespace olens {

struct Tensor::Impl {
  Shape shape;
  std::shared_ptr<std::vector<double>> values;
  bool requires_grad = false;
  std::optional<std::vector<double>> grad;
};

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ",";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

bool AllFinite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "zero-sized dimension in " + ShapeToString(shape));
    }
  }
  if (NumElements(shape) != data.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "shape " + ShapeToString(shape) + " needs " +
                    std::to_string(NumElements(shape)) + " values, got " +
                    std::to_string(data.size()));
  }
  impl_ = std::make_shared<Impl>();
  impl_->shape = std::move(shape);
  impl_->values = std::make_shared<std::vector<double>>(std::move(data));
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  return Full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::Full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = NumElements(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  static const Shape kEmpty;
  return impl_ ? impl_->shape : kEmpty;
}

std::size_t Tensor::size() const { return impl_ ? impl_->values->size() : 0; }

std::span<const double> Tensor::data() const {
  if (!impl_) return {};
  return {impl_->values->data(), impl_->values->size()};
}

std::span<double> Tensor::MutableData() {
  if (!impl_) return {};
  return {impl_->values->data(), impl_->values->size()};
}

double Tensor::item() const {
  if (size() != 1) {
    throw Error(ErrorCode::kNotScalar,
                "item() on tensor of shape " + ShapeToString(shape()));
  }
  return (*impl_->values)[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

void Tensor::set_requires_grad(bool value) {
  if (impl_) impl_->requires_grad = value;
}

bool Tensor::has_grad() const { return impl_ && impl_->grad.has_value(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) return {};
  return {impl_->grad->data(), impl_->grad->size()};
}

void Tensor::set_grad(std::vector<double> grad) {
  if (!impl_ || grad.size() != impl_->values->size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient length mismatch");
  }
  impl_->grad = std::move(grad);
}

void Tensor::clear_grad() {
  if (impl_) impl_->grad.reset();
}

Tensor Tensor::Detach() const {
  Tensor out;
  if (!impl_) return out;
  out.impl_ = std::make_shared<Impl>();
  out.impl_->shape = impl_->shape;
  out.impl_->values = impl_->values;
  return out;
}

Tensor Tensor::Clone() const {
  if (!impl_) return {};
  return Tensor(impl_->shape, *impl_->values, impl_->requires_grad);
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (!impl_ || NumElements(shape) != size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "cannot reshape " + ShapeToString(this->shape()) + " to " +
                    ShapeToString(shape));
  }
  Tensor out;
  out.impl_ = std::make_shared<Impl>();
  out.impl_->shape = std::move(shape);
  out.impl_->values = impl_->values;
  return out;
}

}  // namespace olens
