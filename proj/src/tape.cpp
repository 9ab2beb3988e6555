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


#include "olens/tape.hpp"

#include <unordered_set>
#include <utility>

#include "olens/error.hpp"

namespace olens {

bool Tape::NeedsGrad(const Tensor& t) const {
  if (!t.defined()) return false;
  if (producer_.contains(t.id())) return true;
  return t.requires_grad();
}

void Tape::Record(std::string_view op, std::vector<Tensor> inputs,
                  const Tensor& output, BackwardRule rule) {
  bool any = false;
  for (const Tensor& in : inputs) any = any || NeedsGrad(in);
  if (!any) return;
  producer_.emplace(output.id(), nodes_.size());
  nodes_.push_back(Node{op, std::move(inputs), output, std::move(rule)});
}

void Tape::Backward(const Tensor& output) const {
  if (output.size() != 1) {
    throw Error(ErrorCode::kNotScalar, "backward needs a scalar output, got " +
                                           ShapeToString(output.shape()));
  }
  const auto it = producer_.find(output.id());
  if (it == producer_.end()) {
    throw Error(ErrorCode::kDetachedOutput,
                "output was not produced on this tape");
  }

  std::unordered_map<const void*, std::vector<double>> adjoint;
  adjoint[output.id()] = {1.0};

  // Leaves recorded up to `output`, including those that do not feed it; they
  // receive zeros so no stale gradient survives.
  std::vector<Tensor> leaves;
  std::unordered_set<const void*> seen_leaves;
  for (std::size_t k = 0; k <= it->second; ++k) {
    for (const Tensor& in : nodes_[k].inputs) {
      if (in.requires_grad() && !producer_.contains(in.id()) &&
          seen_leaves.insert(in.id()).second) {
        leaves.push_back(in);
      }
    }
  }

  for (std::size_t k = it->second + 1; k-- > 0;) {
    const Node& node = nodes_[k];
    const auto out_adj = adjoint.find(node.output.id());
    if (out_adj == adjoint.end()) continue;

    BackwardContext ctx;
    ctx.output_grad = out_adj->second;
    ctx.relu_mode = relu_mode_;
    ctx.inputs.reserve(node.inputs.size());
    for (const Tensor& in : node.inputs) {
      if (!NeedsGrad(in)) {
        ctx.inputs.push_back(nullptr);
        continue;
      }
      auto& buf = adjoint[in.id()];
      if (buf.empty()) buf.assign(in.size(), 0.0);
      ctx.inputs.push_back(&buf);
    }
    node.rule(ctx);
    // All consumers of this output have higher indices and already ran.
    adjoint.erase(node.output.id());
  }

  for (Tensor& leaf : leaves) {
    auto found = adjoint.find(leaf.id());
    if (found == adjoint.end()) {
      leaf.set_grad(std::vector<double>(leaf.size(), 0.0));
    } else {
      leaf.set_grad(std::move(found->second));
    }
  }
}

}  // namespace olens
