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


#ifndef OLENS_TAPE_HPP_
#define OLENS_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "olens/tensor.hpp"

namespace olens {

enum class ReluBackwardMode { kStandard, kGuided };

// Gradient buffers handed to a backward rule. Entries of `inputs` are null for
// operands that do not need a gradient. Non-null buffers may already hold
// contributions from other consumers, so rules must accumulate into them.
struct BackwardContext {
  std::span<const double> output_grad;
  std::vector<std::vector<double>*> inputs;
  ReluBackwardMode relu_mode = ReluBackwardMode::kStandard;
};

using BackwardRule = std::function<void(const BackwardContext&)>;

// Append-only record of differentiable operations.
//
// Nodes are stored in creation order and an operand always exists before the
// node consuming it, so reverse order is a valid topological order for the
// backward sweep. Backward does not modify the nodes; calling it twice yields
// identical gradients.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  ReluBackwardMode relu_mode() const { return relu_mode_; }
  void set_relu_mode(ReluBackwardMode mode) { relu_mode_ = mode; }

  // Whether `t` takes part in differentiation: a leaf with requires_grad, or
  // the output of a recorded node.
  bool NeedsGrad(const Tensor& t) const;

  // Records output = op(inputs). Skipped when no input needs a gradient.
  void Record(std::string_view op, std::vector<Tensor> inputs,
              const Tensor& output, BackwardRule rule);

  // Writes d(output)/d(leaf) into the grad slot of every requires_grad leaf
  // that feeds `output` on this tape. Existing leaf gradients are overwritten.
  void Backward(const Tensor& output) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::string_view op;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardRule rule;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const void*, std::size_t> producer_;
  ReluBackwardMode relu_mode_ = ReluBackwardMode::kStandard;
};

// Sets a tape's relu mode for the lifetime of the guard.
class ScopedReluMode {
 public:
  ScopedReluMode(Tape& tape, ReluBackwardMode mode)
      : tape_(tape), saved_(tape.relu_mode()) {
    tape_.set_relu_mode(mode);
  }
  ~ScopedReluMode() { tape_.set_relu_mode(saved_); }
  ScopedReluMode(const ScopedReluMode&) = delete;
  ScopedReluMode& operator=(const ScopedReluMode&) = delete;

 private:
  Tape& tape_;
  ReluBackwardMode saved_;
};

}  // namespace olens

#endif  // OLENS_TAPE_HPP_
