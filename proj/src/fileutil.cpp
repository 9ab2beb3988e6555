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


#include "olens/fileutil.hpp"

#include <fstream>
#include <iterator>
#include <system_error>
#include <unistd.h>

#include "olens/error.hpp"

namespace olens {
namespace fs = std::filesystem;
namespace {

std::string TempSuffix() {
  return ".tmp" + std::to_string(static_cast<long>(::getpid()));
}

void WriteRaw(const fs::path& path, const std::uint8_t* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace

std::vector<std::uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string ReadFileText(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  return {bytes.begin(), bytes.end()};
}

void WriteFileAtomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::path tmp = path;
  tmp += TempSuffix();
  WriteRaw(tmp, bytes.data(), bytes.size());
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot move file into " + path.string());
  }
}

void WriteFileAtomic(const fs::path& path, const std::string& text) {
  WriteFileAtomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void OutputDir::Add(const std::string& name, std::vector<std::uint8_t> bytes) {
  files_[name] = std::move(bytes);
}

void OutputDir::Add(const std::string& name, const std::string& text) {
  files_[name] = std::vector<std::uint8_t>(text.begin(), text.end());
}

void OutputDir::Commit() const {
  std::error_code ec;
  if (fs::exists(dir_, ec)) {
    if (!fs::is_directory(dir_, ec)) {
      throw Error(ErrorCode::kIoError, dir_.string() + " is not a directory");
    }
    for (const auto& [name, bytes] : files_) WriteFileAtomic(dir_ / name, bytes);
    return;
  }
  fs::path parent = dir_.has_parent_path() ? dir_.parent_path() : fs::path(".");
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + parent.string());
  fs::path tmp = dir_;
  tmp += TempSuffix();
  fs::remove_all(tmp, ec);
  try {
    fs::create_directory(tmp);
    for (const auto& [name, bytes] : files_) {
      WriteRaw(tmp / name, bytes.data(), bytes.size());
    }
    fs::rename(tmp, dir_);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw Error(ErrorCode::kIoError, e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

}  // namespace olens
