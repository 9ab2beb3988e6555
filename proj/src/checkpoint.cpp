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


#include "olens/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <utility>

#include "json.hpp"
#include "olens/error.hpp"
#include "olens/fileutil.hpp"

namespace olens {
namespace {

using nlohmann::json;

json LayerToJson(const LayerSpec& l) {
  json j;
  j["kind"] = LayerKindName(l.kind);
  j["trainable"] = l.trainable;
  switch (l.kind) {
    case LayerKind::kConv:
      j["in_channels"] = l.in_channels;
      j["out_channels"] = l.out_channels;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      break;
    case LayerKind::kDense:
      j["in_features"] = l.in_features;
      j["out_features"] = l.out_features;
      break;
    case LayerKind::kDropout:
      j["rate"] = l.rate;
      break;
    case LayerKind::kConcatSkip:
      j["skip_from"] = l.skip_from;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec LayerFromJson(const json& j) {
  LayerSpec l;
  l.kind = ParseLayerKind(j.at("kind").get<std::string>());
  l.trainable = j.at("trainable").get<bool>();
  switch (l.kind) {
    case LayerKind::kConv:
      l.in_channels = j.at("in_channels").get<std::size_t>();
      l.out_channels = j.at("out_channels").get<std::size_t>();
      l.kernel = j.at("kernel").get<std::size_t>();
      l.stride = j.at("stride").get<std::size_t>();
      l.padding = j.at("padding").get<std::size_t>();
      break;
    case LayerKind::kDense:
      l.in_features = j.at("in_features").get<std::size_t>();
      l.out_features = j.at("out_features").get<std::size_t>();
      break;
    case LayerKind::kDropout:
      l.rate = j.at("rate").get<double>();
      break;
    case LayerKind::kConcatSkip:
      l.skip_from = j.at("skip_from").get<std::size_t>();
      break;
    default:
      break;
  }
  return l;
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

void PutF64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double GetF64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

json MetadataJson(const Network& net) {
  json meta;
  meta["arch"] = net.arch();
  meta["input_shape"] = net.input_shape();
  json layers = json::array();
  for (const LayerSpec& l : net.layers()) layers.push_back(LayerToJson(l));
  meta["layers"] = std::move(layers);
  json counts = json::array();
  for (const Tensor& p : net.parameters()) counts.push_back(p.size());
  meta["param_counts"] = std::move(counts);
  meta["seed"] = net.seed();
  meta["epochs_trained"] = net.epochs_trained();
  return meta;
}

}  // namespace

std::string CheckpointMetadata(const Network& net) {
  return MetadataJson(net).dump();
}

std::vector<std::uint8_t> EncodeCheckpoint(const Network& net) {
  const std::string meta = CheckpointMetadata(net);
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic),
                                std::end(kCheckpointMagic));
  PutU32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  out.reserve(out.size() + 8 * net.scalar_parameter_count());
  for (const Tensor& p : net.parameters()) {
    for (double v : p.data()) PutF64(out, v);
  }
  return out;
}

Network DecodeCheckpoint(const std::vector<std::uint8_t>& bytes) {
  // "OLENS\0" identifies the format; the last two bytes carry the version.
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kCheckpointMagic, 6) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an olens checkpoint");
  }
  if (bytes.size() < 8) {
    throw Error(ErrorCode::kTruncatedPayload, "checkpoint header truncated");
  }
  if (std::memcmp(bytes.data() + 6, kCheckpointMagic + 6, 2) != 0) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported checkpoint version '" +
                    std::string(bytes.begin() + 6, bytes.begin() + 8) + "'");
  }
  if (bytes.size() < 12) {
    throw Error(ErrorCode::kTruncatedPayload, "checkpoint header truncated");
  }
  const std::size_t meta_len = GetU32(bytes.data() + 8);
  if (bytes.size() - 12 < meta_len) {
    throw Error(ErrorCode::kTruncatedPayload, "metadata block truncated");
  }
  const std::string meta_text(bytes.begin() + 12, bytes.begin() + 12 + meta_len);

  std::string arch;
  Shape input_shape;
  std::vector<LayerSpec> layers;
  std::vector<std::size_t> counts;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  try {
    const json meta = json::parse(meta_text);
    arch = meta.at("arch").get<std::string>();
    input_shape = meta.at("input_shape").get<Shape>();
    for (const json& l : meta.at("layers")) layers.push_back(LayerFromJson(l));
    counts = meta.at("param_counts").get<std::vector<std::size_t>>();
    seed = meta.at("seed").get<std::uint64_t>();
    epochs = meta.at("epochs_trained").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMetaParseError, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kMetaParseError, e.what());
  }

  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  const std::size_t payload = bytes.size() - 12 - meta_len;
  if (payload != 8 * total) {
    throw Error(ErrorCode::kTruncatedPayload,
                "payload has " + std::to_string(payload) + " bytes, metadata declares " +
                    std::to_string(8 * total));
  }

  // Rebuild with placeholder weights to learn the expected parameter shapes.
  std::vector<Shape> shapes;
  try {
    Network probe(arch, input_shape, layers, std::uint64_t{0});
    for (const Tensor& p : probe.parameters()) shapes.push_back(p.shape());
  } catch (const Error& e) {
    throw Error(ErrorCode::kMetaParseError,
                std::string("invalid architecture: ") + e.what());
  }
  if (shapes.size() != counts.size()) {
    throw Error(ErrorCode::kMetaParseError,
                "param_counts lists " + std::to_string(counts.size()) +
                    " tensors, architecture has " + std::to_string(shapes.size()));
  }
  std::vector<Tensor> params;
  const std::uint8_t* p = bytes.data() + 12 + meta_len;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (NumElements(shapes[i]) != counts[i]) {
      throw Error(ErrorCode::kMetaParseError,
                  "param_counts[" + std::to_string(i) + "] disagrees with architecture");
    }
    std::vector<double> values(counts[i]);
    for (double& v : values) {
      v = GetF64(p);
      p += 8;
    }
    if (!AllFinite(values)) {
      throw Error(ErrorCode::kMetaParseError, "non-finite parameter value");
    }
    params.emplace_back(shapes[i], std::move(values), true);
  }
  Network net(std::move(arch), std::move(input_shape), std::move(layers),
              std::move(params));
  net.set_seed(seed);
  net.set_epochs_trained(epochs);
  return net;
}

std::size_t SaveCheckpoint(const Network& net, const std::filesystem::path& path) {
  const auto bytes = EncodeCheckpoint(net);
  WriteFileAtomic(path, bytes);
  return bytes.size();
}

Network LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace olens
