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


#ifndef OLENS_IMAGE_IO_HPP_
#define OLENS_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "olens/tensor.hpp"

namespace olens {

// Netpbm codecs for binary PGM (P5, grayscale) and PPM (P6, RGB), maxval 255.
//
// Writers emit "P5\n<W> <H>\n255\n" (resp. P6) followed by the raw bytes and
// never write comments. Readers accept arbitrary whitespace and '#' comments
// between header tokens, exactly one whitespace byte before the pixel data,
// and reject any maxval other than 255.
//
// Pixel values are stored as round(x * 255) with halves rounded up, clamped
// to [0,255]; reading maps byte u back to u / 255.

std::uint8_t QuantizeUnit(double x);

// image: [1,H,W] or [H,W]. Returns the file bytes.
std::vector<std::uint8_t> EncodePgm(const Tensor& image);
// Returns [1,H,W].
Tensor DecodePgm(const std::vector<std::uint8_t>& bytes);

// image: [3,H,W] (channel-major).
std::vector<std::uint8_t> EncodePpm(const Tensor& image);
// Returns [3,H,W].
Tensor DecodePpm(const std::vector<std::uint8_t>& bytes);

Tensor ReadPgm(const std::filesystem::path& path);
void WritePgm(const std::filesystem::path& path, const Tensor& image);
Tensor ReadPpm(const std::filesystem::path& path);
void WritePpm(const std::filesystem::path& path, const Tensor& image);

// Signed attribution grids: magic "OLSAL\0v1", u32 H, u32 W (little-endian),
// then H*W binary64 values, row-major.
std::vector<std::uint8_t> EncodeF64Grid(const Tensor& grid);
Tensor DecodeF64Grid(const std::vector<std::uint8_t>& bytes);

}  // namespace olens

#endif  // OLENS_IMAGE_IO_HPP_
