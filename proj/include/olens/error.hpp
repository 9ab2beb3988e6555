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

#ifndef OLENS_ERROR_HPP_
#define OLENS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace olens {

// Every failure raised by the library carries one of these codes. The C API
// folds them into coarser status values (see olens.h).
enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNonIntegralOutputSize,
  kOddSpatialDim,
  kInvalidRate,
  kEmptyRegion,
  kNotScalar,
  kDetachedOutput,
  kNonFinite,
  kIndivisibleInput,
  kBadMagic,
  kVersionMismatch,
  kTruncatedPayload,
  kMetaParseError,
  kIndexOutOfRange,
  kMissingGradient,
  kEmptyDataset,
  kTooFewSamples,
  kNotSimplex,
  kBadTarget,
  kBadBaseline,
  kBadSteps,
  kBadSize,
  kBadMagicNumber,
  kBadMaxval,
  kTruncatedPixelData,
  kRangeError,
  kIoError,
  kDataMismatch,
  kCheckpointMismatch,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace olens

#endif  // OLENS_ERROR_HPP_
