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


#ifndef OLENS_FILEUTIL_HPP_
#define OLENS_FILEUTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace olens {

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
std::string ReadFileText(const std::filesystem::path& path);

// Writes through a temporary file in the same directory and renames it over
// `path`, so readers never observe a partial file.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::vector<std::uint8_t>& bytes);
void WriteFileAtomic(const std::filesystem::path& path, const std::string& text);

// Collects named files in memory and publishes them into a directory.
//
// If the directory does not exist, everything is written into a temporary
// sibling directory which is renamed into place. Otherwise each file is
// written atomically. Nothing touches the filesystem before Commit().
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void Add(const std::string& name, std::vector<std::uint8_t> bytes);
  void Add(const std::string& name, const std::string& text);
  void Commit() const;

  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::vector<std::uint8_t>> files_;
};

}  // namespace olens

#endif  // OLENS_FILEUTIL_HPP_
