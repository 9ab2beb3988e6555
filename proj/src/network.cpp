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


#include "olens/network.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "olens/error.hpp"
#include "olens/ops.hpp"

namespace olens {
namespace {

bool IsWeighted(LayerKind kind) {
  return kind == LayerKind::kConv || kind == LayerKind::kDense;
}

// Shape of each parameter tensor for a weighted layer.
std::vector<Shape> ParameterShapes(const LayerSpec& l) {
  if (l.kind == LayerKind::kConv) {
    return {{l.out_channels, l.in_channels, l.kernel, l.kernel},
            {l.out_channels}};
  }
  if (l.kind == LayerKind::kDense) {
    return {{l.out_features, l.in_features}, {l.out_features}};
  }
  return {};
}

[[noreturn]] void Mismatch(std::size_t layer, const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch,
              "layer " + std::to_string(layer) + ": " + what);
}

}  // namespace

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kUpsample: return "upsample";
    case LayerKind::kConcatSkip: return "concat_skip";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kDense: return "dense";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "unknown";
}

LayerKind ParseLayerKind(std::string_view name) {
  for (LayerKind k :
       {LayerKind::kConv, LayerKind::kRelu, LayerKind::kSigmoid,
        LayerKind::kMaxPool, LayerKind::kUpsample, LayerKind::kConcatSkip,
        LayerKind::kDropout, LayerKind::kDense, LayerKind::kFlatten,
        LayerKind::kSoftmax}) {
    if (LayerKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::Conv(std::size_t in, std::size_t out, std::size_t kernel,
                          std::size_t padding, bool trainable) {
  LayerSpec l;
  l.kind = LayerKind::kConv;
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = kernel;
  l.padding = padding;
  l.trainable = trainable;
  return l;
}

LayerSpec LayerSpec::Dense(std::size_t in, std::size_t out, bool trainable) {
  LayerSpec l;
  l.kind = LayerKind::kDense;
  l.in_features = in;
  l.out_features = out;
  l.trainable = trainable;
  return l;
}

LayerSpec LayerSpec::Dropout(double rate) {
  LayerSpec l;
  l.kind = LayerKind::kDropout;
  l.rate = rate;
  return l;
}

LayerSpec LayerSpec::ConcatSkip(std::size_t from) {
  LayerSpec l;
  l.kind = LayerKind::kConcatSkip;
  l.skip_from = from;
  return l;
}

LayerSpec LayerSpec::Simple(LayerKind kind) {
  LayerSpec l;
  l.kind = kind;
  return l;
}

Network::Network(std::string arch, Shape input_shape,
                 std::vector<LayerSpec> layers, std::uint64_t init_seed)
    : arch_(std::move(arch)),
      input_shape_(std::move(input_shape)),
      layers_(std::move(layers)),
      seed_(init_seed) {
  Validate();
  RngStream rng(init_seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (const Shape& s : ParameterShapes(layers_[i])) {
      layer_params_[i].push_back(params_.size());
      params_.push_back(Tensor::Zeros(s, true));
    }
    InitializeLayer(i, rng);
  }
}

Network::Network(std::string arch, Shape input_shape,
                 std::vector<LayerSpec> layers, std::vector<Tensor> params)
    : arch_(std::move(arch)),
      input_shape_(std::move(input_shape)),
      layers_(std::move(layers)) {
  Validate();
  std::size_t next = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (const Shape& s : ParameterShapes(layers_[i])) {
      if (next >= params.size() || params[next].shape() != s) {
        throw Error(ErrorCode::kShapeMismatch,
                    "parameter " + std::to_string(next) + " of layer " +
                        std::to_string(i) + " should have shape " +
                        ShapeToString(s));
      }
      params[next].set_requires_grad(true);
      layer_params_[i].push_back(next++);
    }
  }
  if (next != params.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "network takes " + std::to_string(next) +
                    " parameter tensors, got " + std::to_string(params.size()));
  }
  params_ = std::move(params);
}

void Network::Validate() {
  if (input_shape_.size() != 3) {
    throw Error(ErrorCode::kShapeMismatch,
                "input shape must be [C,H,W], got " + ShapeToString(input_shape_));
  }
  layer_params_.assign(layers_.size(), {});
  std::vector<Shape> shapes;
  Shape cur = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    switch (l.kind) {
      case LayerKind::kConv: {
        if (cur.size() != 3 || cur[0] != l.in_channels) {
          Mismatch(i, "conv expects " + std::to_string(l.in_channels) +
                          " channels, input is " + ShapeToString(cur));
        }
        if (l.kernel == 0 || l.out_channels == 0 || l.stride == 0) {
          Mismatch(i, "conv needs positive kernel, channels and stride");
        }
        const std::size_t hp = cur[1] + 2 * l.padding;
        const std::size_t wp = cur[2] + 2 * l.padding;
        if (l.kernel > hp || l.kernel > wp) Mismatch(i, "kernel exceeds input");
        if ((hp - l.kernel) % l.stride || (wp - l.kernel) % l.stride) {
          throw Error(ErrorCode::kNonIntegralOutputSize,
                      "layer " + std::to_string(i) + ": stride does not divide");
        }
        cur = {l.out_channels, (hp - l.kernel) / l.stride + 1,
               (wp - l.kernel) / l.stride + 1};
        break;
      }
      case LayerKind::kMaxPool:
        if (cur.size() != 3) Mismatch(i, "maxpool needs [C,H,W]");
        if (cur[1] % 2 || cur[2] % 2) {
          throw Error(ErrorCode::kOddSpatialDim,
                      "layer " + std::to_string(i) + ": odd spatial dims " +
                          ShapeToString(cur));
        }
        cur = {cur[0], cur[1] / 2, cur[2] / 2};
        break;
      case LayerKind::kUpsample:
        if (cur.size() != 3) Mismatch(i, "upsample needs [C,H,W]");
        cur = {cur[0], cur[1] * 2, cur[2] * 2};
        break;
      case LayerKind::kConcatSkip: {
        if (l.skip_from >= i) {
          throw Error(ErrorCode::kInvalidArgument,
                      "layer " + std::to_string(i) +
                          ": concat_skip must reference an earlier layer");
        }
        const Shape& other = shapes[l.skip_from];
        if (cur.size() != 3 || other.size() != 3 || cur[1] != other[1] ||
            cur[2] != other[2]) {
          Mismatch(i, "concat_skip of " + ShapeToString(cur) + " and " +
                          ShapeToString(other));
        }
        cur = {cur[0] + other[0], cur[1], cur[2]};
        break;
      }
      case LayerKind::kDropout:
        if (!(l.rate >= 0.0 && l.rate < 1.0)) {
          throw Error(ErrorCode::kInvalidRate,
                      "layer " + std::to_string(i) + ": dropout rate " +
                          std::to_string(l.rate));
        }
        break;
      case LayerKind::kDense:
        if (cur.size() != 1 || cur[0] != l.in_features || l.out_features == 0) {
          Mismatch(i, "dense expects [" + std::to_string(l.in_features) +
                          "], input is " + ShapeToString(cur));
        }
        cur = {l.out_features};
        break;
      case LayerKind::kFlatten:
        cur = {NumElements(cur)};
        break;
      case LayerKind::kSoftmax:
        if (cur.size() != 1) Mismatch(i, "softmax needs a vector input");
        break;
      case LayerKind::kRelu:
      case LayerKind::kSigmoid:
        break;
    }
    shapes.push_back(cur);
  }
  output_shape_ = cur;
}

void Network::InitializeLayer(std::size_t layer, RngStream& rng) {
  const LayerSpec& l = layers_[layer];
  if (!IsWeighted(l.kind)) return;
  const std::size_t fan_in = l.kind == LayerKind::kConv
                                 ? l.in_channels * l.kernel * l.kernel
                                 : l.in_features;
  // He initialization ahead of a relu, 1/sqrt(fan_in) for output layers.
  const bool before_relu = layer + 1 < layers_.size() &&
                           layers_[layer + 1].kind == LayerKind::kRelu;
  const double stddev = std::sqrt((before_relu ? 2.0 : 1.0) / fan_in);
  Tensor& w = params_[layer_params_[layer][0]];
  for (double& v : w.MutableData()) v = rng.Normal(0.0, stddev);
  Tensor& b = params_[layer_params_[layer][1]];
  for (double& v : b.MutableData()) v = 0.0;
}

void Network::Reinitialize(std::size_t layer, std::uint64_t seed) {
  RngStream rng(seed);
  InitializeLayer(layer, rng);
}

Tensor Network::Forward(const Tensor& input,
                        const ForwardOptions& options) const {
  if (input.shape() != input_shape_) {
    throw Error(ErrorCode::kShapeMismatch,
                "network expects input " + ShapeToString(input_shape_) +
                    ", got " + ShapeToString(input.shape()));
  }
  const bool stochastic = options.mode == ForwardMode::kStochastic;
  if (stochastic && options.rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "stochastic forward needs an rng stream");
  }
  std::size_t end = layers_.size();
  if (options.output == OutputKind::kLogits && end > 0 &&
      (layers_.back().kind == LayerKind::kSigmoid ||
       layers_.back().kind == LayerKind::kSoftmax)) {
    --end;
  }
  auto param = [&](std::size_t layer, std::size_t k) {
    const Tensor& p = params_[layer_params_[layer][k]];
    return options.param_grads ? p : p.Detach();
  };

  Tape* tape = options.tape;
  std::vector<Tensor> outputs;
  outputs.reserve(end);
  Tensor cur = input;
  for (std::size_t i = 0; i < end; ++i) {
    const LayerSpec& l = layers_[i];
    switch (l.kind) {
      case LayerKind::kConv:
        cur = ops::Conv2d(cur, param(i, 0), param(i, 1), l.stride, l.padding,
                          tape);
        break;
      case LayerKind::kRelu:
        cur = ops::Relu(cur, tape);
        break;
      case LayerKind::kSigmoid:
        cur = ops::Sigmoid(cur, tape);
        break;
      case LayerKind::kMaxPool:
        cur = ops::MaxPool2d(cur, tape);
        break;
      case LayerKind::kUpsample:
        cur = ops::Upsample2dNearest(cur, tape);
        break;
      case LayerKind::kConcatSkip:
        cur = ops::ConcatChannels(cur, outputs[l.skip_from], tape);
        break;
      case LayerKind::kDropout:
        if (stochastic) {
          cur = ops::Dropout(cur, l.rate, *options.rng, true, tape);
        }
        break;
      case LayerKind::kDense:
        cur = ops::Dense(cur, param(i, 0), param(i, 1), tape);
        break;
      case LayerKind::kFlatten:
        cur = ops::Reshape(cur, {cur.size()}, tape);
        break;
      case LayerKind::kSoftmax:
        cur = ops::Softmax(cur, tape);
        break;
    }
    outputs.push_back(cur);
  }
  return cur;
}

std::vector<bool> Network::parameter_trainable() const {
  std::vector<bool> out(params_.size(), false);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (std::size_t p : layer_params_[i]) out[p] = layers_[i].trainable;
  }
  return out;
}

std::size_t Network::scalar_parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& p : params_) n += p.size();
  return n;
}

std::size_t Network::weighted_layer_count() const {
  std::size_t n = 0;
  for (const LayerSpec& l : layers_) n += IsWeighted(l.kind) ? 1 : 0;
  return n;
}

bool Network::has_dropout() const {
  for (const LayerSpec& l : layers_) {
    if (l.kind == LayerKind::kDropout && l.rate > 0.0) return true;
  }
  return false;
}

void Network::set_trainable(std::size_t layer, bool trainable) {
  layers_.at(layer).trainable = trainable;
}

Network Network::Clone() const {
  std::vector<Tensor> copies;
  copies.reserve(params_.size());
  for (const Tensor& p : params_) copies.push_back(p.Clone());
  Network out(arch_, input_shape_, layers_, std::move(copies));
  out.seed_ = seed_;
  out.epochs_trained_ = epochs_trained_;
  return out;
}

Network BuildUnet(std::size_t base_channels, double dropout_rate,
                  const Shape& input_shape, std::uint64_t seed) {
  if (input_shape.size() != 3 || input_shape[0] != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "U-Net input must be [1,H,W], got " + ShapeToString(input_shape));
  }
  if (input_shape[1] % 4 || input_shape[2] % 4) {
    throw Error(ErrorCode::kIndivisibleInput,
                "U-Net input H and W must be divisible by 4, got " +
                    ShapeToString(input_shape));
  }
  if (base_channels == 0) {
    throw Error(ErrorCode::kInvalidArgument, "base_channels must be positive");
  }
  const std::size_t b = base_channels;
  using K = LayerKind;
  std::vector<LayerSpec> layers = {
      // Encoder level 1; output of layer 4 feeds the second skip.
      LayerSpec::Conv(1, b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Conv(b, b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Dropout(dropout_rate),
      // Encoder level 2; output of layer 10 feeds the first skip.
      LayerSpec::Simple(K::kMaxPool),
      LayerSpec::Conv(b, 2 * b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Conv(2 * b, 2 * b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Dropout(dropout_rate),
      // Bottleneck.
      LayerSpec::Simple(K::kMaxPool),
      LayerSpec::Conv(2 * b, 4 * b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Conv(4 * b, 4 * b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Dropout(dropout_rate),
      // Decoder level 2.
      LayerSpec::Simple(K::kUpsample), LayerSpec::ConcatSkip(10),
      LayerSpec::Conv(6 * b, 2 * b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Dropout(dropout_rate),
      // Decoder level 1 and 1x1 head.
      LayerSpec::Simple(K::kUpsample), LayerSpec::ConcatSkip(4),
      LayerSpec::Conv(3 * b, b, 3, 1), LayerSpec::Simple(K::kRelu),
      LayerSpec::Dropout(dropout_rate),
      LayerSpec::Conv(b, 1, 1, 0), LayerSpec::Simple(K::kSigmoid),
  };
  return Network("unet", input_shape, std::move(layers), seed);
}

Network BuildClassifier(std::size_t n_classes, const Shape& input_shape,
                        double dropout_rate, std::uint64_t seed,
                        std::size_t base_channels) {
  if (input_shape.size() != 3 || input_shape[0] != 1) {
    throw Error(ErrorCode::kShapeMismatch, "classifier input must be [1,H,W], got " +
                                               ShapeToString(input_shape));
  }
  if (input_shape[1] % 8 || input_shape[2] % 8) {
    throw Error(ErrorCode::kIndivisibleInput,
                "classifier input H and W must be divisible by 8, got " +
                    ShapeToString(input_shape));
  }
  if (n_classes < 2 || base_channels == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "classifier needs at least 2 classes and positive width");
  }
  using K = LayerKind;
  std::vector<LayerSpec> layers;
  std::size_t in = 1;
  std::size_t width = base_channels;
  for (int stage = 0; stage < 3; ++stage) {
    layers.push_back(LayerSpec::Conv(in, width, 3, 1, false));
    layers.push_back(LayerSpec::Simple(K::kRelu));
    layers.push_back(LayerSpec::Conv(width, width, 3, 1, false));
    layers.push_back(LayerSpec::Simple(K::kRelu));
    layers.push_back(LayerSpec::Simple(K::kMaxPool));
    in = width;
    width *= 2;
  }
  const std::size_t features = in * (input_shape[1] / 8) * (input_shape[2] / 8);
  layers.push_back(LayerSpec::Simple(K::kFlatten));
  layers.push_back(LayerSpec::Dropout(dropout_rate));
  layers.push_back(LayerSpec::Dense(features, n_classes, true));
  layers.push_back(LayerSpec::Simple(K::kSoftmax));
  return Network("classifier", input_shape, std::move(layers), seed);
}

Network BuildLinearProbe(const Shape& input_shape, std::size_t n_outputs,
                         std::uint64_t seed) {
  std::vector<LayerSpec> layers = {
      LayerSpec::Simple(LayerKind::kFlatten),
      LayerSpec::Dense(NumElements(input_shape), n_outputs, true)};
  return Network("linear", input_shape, std::move(layers), seed);
}

}  // namespace olens
