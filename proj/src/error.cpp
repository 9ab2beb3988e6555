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

#include "olens/error.hpp"

namespace olens {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonIntegralOutputSize: return "NonIntegralOutputSize";
    case ErrorCode::kOddSpatialDim: return "OddSpatialDim";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kEmptyRegion: return "EmptyRegion";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kDetachedOutput: return "DetachedOutput";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kIndivisibleInput: return "IndivisibleInput";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kMetaParseError: return "MetaParseError";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kMissingGradient: return "MissingGradient";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kNotSimplex: return "NotSimplex";
    case ErrorCode::kBadTarget: return "BadTarget";
    case ErrorCode::kBadBaseline: return "BadBaseline";
    case ErrorCode::kBadSteps: return "BadSteps";
    case ErrorCode::kBadSize: return "BadSize";
    case ErrorCode::kBadMagicNumber: return "BadMagicNumber";
    case ErrorCode::kBadMaxval: return "BadMaxval";
    case ErrorCode::kTruncatedPixelData: return "TruncatedPixelData";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDataMismatch: return "DataMismatch";
    case ErrorCode::kCheckpointMismatch: return "CheckpointMismatch";
  }
  return "Unknown";
}

}  // namespace olens
