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


#include "olens/image_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

#include "olens/error.hpp"
#include "olens/fileutil.hpp"

namespace olens {
namespace {

constexpr char kGridMagic[8] = {'O', 'L', 'S', 'A', 'L', '\0', 'v', '1'};

struct NetpbmHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t data_offset = 0;
};

NetpbmHeader ParseHeader(const std::vector<std::uint8_t>& bytes, char kind) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != static_cast<std::uint8_t>(kind)) {
    throw Error(ErrorCode::kBadMagicNumber,
                std::string("expected netpbm magic P") + kind);
  }
  std::size_t pos = 2;
  auto next_token = [&]() -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorCode::kTruncatedPixelData, "malformed netpbm header");
    }
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1u << 24)) {
        throw Error(ErrorCode::kTruncatedPixelData, "netpbm header value too large");
      }
      ++pos;
    }
    return value;
  };
  NetpbmHeader h;
  h.width = next_token();
  h.height = next_token();
  const std::size_t maxval = next_token();
  if (maxval != 255) {
    throw Error(ErrorCode::kBadMaxval,
                "maxval must be 255, got " + std::to_string(maxval));
  }
  if (h.width == 0 || h.height == 0) {
    throw Error(ErrorCode::kTruncatedPixelData, "empty image");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::kTruncatedPixelData, "missing pixel data");
  }
  h.data_offset = pos + 1;
  return h;
}

std::vector<std::uint8_t> HeaderBytes(char kind, std::size_t w, std::size_t h) {
  const std::string s = std::string("P") + kind + "\n" + std::to_string(w) + " " +
                        std::to_string(h) + "\n255\n";
  return {s.begin(), s.end()};
}

}  // namespace

std::uint8_t QuantizeUnit(double x) {
  const double u = std::floor(x * 255.0 + 0.5);
  if (!(u > 0.0)) return 0;
  if (u >= 255.0) return 255;
  return static_cast<std::uint8_t>(u);
}

std::vector<std::uint8_t> EncodePgm(const Tensor& image) {
  std::size_t h = 0, w = 0;
  if (image.rank() == 3 && image.dim(0) == 1) {
    h = image.dim(1);
    w = image.dim(2);
  } else if (image.rank() == 2) {
    h = image.dim(0);
    w = image.dim(1);
  } else {
    throw Error(ErrorCode::kShapeMismatch,
                "PGM needs [1,H,W] or [H,W], got " + ShapeToString(image.shape()));
  }
  auto out = HeaderBytes('5', w, h);
  for (double v : image.data()) out.push_back(QuantizeUnit(v));
  return out;
}

Tensor DecodePgm(const std::vector<std::uint8_t>& bytes) {
  const NetpbmHeader h = ParseHeader(bytes, '5');
  const std::size_t n = h.width * h.height;
  if (bytes.size() - h.data_offset < n) {
    throw Error(ErrorCode::kTruncatedPixelData,
                "expected " + std::to_string(n) + " pixel bytes");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = bytes[h.data_offset + i] / 255.0;
  return Tensor({1, h.height, h.width}, std::move(values));
}

std::vector<std::uint8_t> EncodePpm(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw Error(ErrorCode::kShapeMismatch,
                "PPM needs [3,H,W], got " + ShapeToString(image.shape()));
  }
  const std::size_t h = image.dim(1), w = image.dim(2), plane = h * w;
  auto out = HeaderBytes('6', w, h);
  const auto d = image.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) out.push_back(QuantizeUnit(d[c * plane + i]));
  }
  return out;
}

Tensor DecodePpm(const std::vector<std::uint8_t>& bytes) {
  const NetpbmHeader h = ParseHeader(bytes, '6');
  const std::size_t plane = h.width * h.height;
  if (bytes.size() - h.data_offset < 3 * plane) {
    throw Error(ErrorCode::kTruncatedPixelData,
                "expected " + std::to_string(3 * plane) + " pixel bytes");
  }
  std::vector<double> values(3 * plane);
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      values[c * plane + i] = bytes[h.data_offset + 3 * i + c] / 255.0;
    }
  }
  return Tensor({3, h.height, h.width}, std::move(values));
}

Tensor ReadPgm(const std::filesystem::path& path) { return DecodePgm(ReadFileBytes(path)); }
void WritePgm(const std::filesystem::path& path, const Tensor& image) {
  WriteFileAtomic(path, EncodePgm(image));
}
Tensor ReadPpm(const std::filesystem::path& path) { return DecodePpm(ReadFileBytes(path)); }
void WritePpm(const std::filesystem::path& path, const Tensor& image) {
  WriteFileAtomic(path, EncodePpm(image));
}

std::vector<std::uint8_t> EncodeF64Grid(const Tensor& grid) {
  if (grid.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "grid must be [H,W], got " + ShapeToString(grid.shape()));
  }
  std::vector<std::uint8_t> out(std::begin(kGridMagic), std::end(kGridMagic));
  auto put = [&out](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(grid.dim(0), 4);
  put(grid.dim(1), 4);
  for (double v : grid.data()) put(std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

Tensor DecodeF64Grid(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGridMagic, 8) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an attribution grid");
  }
  auto get = [&bytes](std::size_t at, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
    return v;
  };
  const std::size_t h = get(8, 4), w = get(12, 4);
  if (h == 0 || w == 0 || bytes.size() != 16 + 8 * h * w) {
    throw Error(ErrorCode::kTruncatedPayload, "attribution grid length mismatch");
  }
  std::vector<double> values(h * w);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<double>(get(16 + 8 * i, 8));
  }
  return Tensor({h, w}, std::move(values));
}

}  // namespace olens
