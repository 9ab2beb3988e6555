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


#ifndef OLENS_CHECKPOINT_HPP_
#define OLENS_CHECKPOINT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "olens/network.hpp"

namespace olens {

// Checkpoint layout (all integers little-endian):
//
//   bytes 0..7   magic "OLENS\0v1"
//   bytes 8..11  u32 length of the metadata block
//   metadata     UTF-8 JSON with keys arch, input_shape, layers,
//                param_counts, seed, epochs_trained
//   payload      every parameter as IEEE-754 binary64, in layer order
//
// The payload must hold exactly 8 * sum(param_counts) bytes.
inline constexpr char kCheckpointMagic[8] = {'O', 'L', 'E', 'N',
                                             'S', '\0', 'v', '1'};

std::vector<std::uint8_t> EncodeCheckpoint(const Network& net);
Network DecodeCheckpoint(const std::vector<std::uint8_t>& bytes);

// Returns the number of bytes written. The file is written to a temporary
// sibling and renamed into place.
std::size_t SaveCheckpoint(const Network& net, const std::filesystem::path& path);
Network LoadCheckpoint(const std::filesystem::path& path);

// The metadata JSON that EncodeCheckpoint embeds.
std::string CheckpointMetadata(const Network& net);

}  // namespace olens

#endif  // OLENS_CHECKPOINT_HPP_
