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


#ifndef OLENS_NETWORK_HPP_
#define OLENS_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "olens/rng.hpp"
#include "olens/tape.hpp"
#include "olens/tensor.hpp"

namespace olens {

enum class LayerKind {
  kConv,
  kRelu,
  kSigmoid,
  kMaxPool,
  kUpsample,
  kConcatSkip,
  kDropout,
  kDense,
  kFlatten,
  kSoftmax,
};

std::string_view LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(std::string_view name);

// One layer of a sequential network. Only the fields relevant to `kind` are
// meaningful; the rest stay at their defaults.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  // conv
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  // dense
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  // dropout
  double rate = 0.0;
  // concat_skip: the output of layer `skip_from` is appended along channels.
  std::size_t skip_from = 0;
  bool trainable = true;

  static LayerSpec Conv(std::size_t in, std::size_t out, std::size_t kernel,
                        std::size_t padding, bool trainable = true);
  static LayerSpec Dense(std::size_t in, std::size_t out, bool trainable = true);
  static LayerSpec Dropout(double rate);
  static LayerSpec ConcatSkip(std::size_t from);
  static LayerSpec Simple(LayerKind kind);

  bool operator==(const LayerSpec&) const = default;
};

enum class ForwardMode { kDeterministic, kStochastic };
enum class OutputKind { kProbabilities, kLogits };

struct ForwardOptions {
  ForwardMode mode = ForwardMode::kDeterministic;
  // Source of dropout masks; required in stochastic mode.
  RngStream* rng = nullptr;
  // Records the pass when set.
  Tape* tape = nullptr;
  // kLogits stops before a trailing sigmoid or softmax.
  OutputKind output = OutputKind::kProbabilities;
  // When false, parameters enter the tape as constants, so only the input
  // (if it requires a gradient) is differentiated.
  bool param_grads = true;
};

// Sequential network with skip connections and per-layer trainability.
class Network {
 public:
  // Validates the layer chain against `input_shape` and draws initial weights
  // from `init_seed`.
  Network(std::string arch, Shape input_shape, std::vector<LayerSpec> layers,
          std::uint64_t init_seed);
  // Validates and adopts existing parameters, given in layer order.
  Network(std::string arch, Shape input_shape, std::vector<LayerSpec> layers,
          std::vector<Tensor> params);

  Tensor Forward(const Tensor& input, const ForwardOptions& options = {}) const;

  const std::string& arch() const { return arch_; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  // Parameter tensors in layer order: conv (kernels, bias), dense
  // (weights, bias).
  const std::vector<Tensor>& parameters() const { return params_; }
  std::vector<Tensor>& parameters() { return params_; }
  // Trainability of each entry of parameters().
  std::vector<bool> parameter_trainable() const;
  // Indices into parameters() owned by layer `layer`.
  const std::vector<std::size_t>& layer_parameters(std::size_t layer) const {
    return layer_params_.at(layer);
  }
  std::size_t scalar_parameter_count() const;

  std::size_t weighted_layer_count() const;
  bool has_dropout() const;
  void set_trainable(std::size_t layer, bool trainable);
  // Fresh random weights for one layer.
  void Reinitialize(std::size_t layer, std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  std::size_t epochs_trained() const { return epochs_trained_; }
  void set_epochs_trained(std::size_t n) { epochs_trained_ = n; }

  // Deep copy; parameters are not shared with the original.
  Network Clone() const;

 private:
  void Validate();
  void InitializeLayer(std::size_t layer, RngStream& rng);

  std::string arch_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Tensor> params_;
  std::vector<std::vector<std::size_t>> layer_params_;
  std::uint64_t seed_ = 0;
  std::size_t epochs_trained_ = 0;
};

// Two-level U-Net with nine weighted 3x3/1x1 convolutions, dropout after each
// conv block and a sigmoid head. input_shape is [1,H,W] with H, W divisible
// by 4.
Network BuildUnet(std::size_t base_channels, double dropout_rate,
                  const Shape& input_shape, std::uint64_t seed = 0);

// VGG-style classifier: three conv-conv-pool stages (frozen), then flatten,
// dropout, a trainable dense head and softmax. H, W divisible by 8.
Network BuildClassifier(std::size_t n_classes, const Shape& input_shape,
                        double dropout_rate, std::uint64_t seed = 0,
                        std::size_t base_channels = 8);

// flatten + dense, no output activation. Used as a linear test model.
Network BuildLinearProbe(const Shape& input_shape, std::size_t n_outputs,
                         std::uint64_t seed = 0);

}  // namespace olens

#endif  // OLENS_NETWORK_HPP_
