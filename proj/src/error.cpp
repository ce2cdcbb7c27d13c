// Copyright 2026-present the embedlens authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embedlens/error.hpp"

namespace embedlens {

std::string_view
error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument:
            return "InvalidArgument";
        case ErrorCode::kZeroVector:
            return "ZeroVector";
        case ErrorCode::kDimensionMismatch:
            return "DimensionMismatch";
        case ErrorCode::kEmptySet:
            return "EmptySet";
        case ErrorCode::kInvalidSet:
            return "InvalidSet";
        case ErrorCode::kManifestParse:
            return "ManifestParse";
        case ErrorCode::kBlobSizeMismatch:
            return "BlobSizeMismatch";
        case ErrorCode::kNonFiniteValue:
            return "NonFiniteValue";
        case ErrorCode::kIoFailure:
            return "IoFailure";
        case ErrorCode::kClassTooSmall:
            return "ClassTooSmall";
        case ErrorCode::kUnknownClassId:
            return "UnknownClassId";
        case ErrorCode::kTooFewSamples:
            return "TooFewSamples";
        case ErrorCode::kNumericalFailure:
            return "NumericalFailure";
        case ErrorCode::kSplitMismatch:
            return "SplitMismatch";
        case ErrorCode::kClassUniverseMismatch:
            return "ClassUniverseMismatch";
        case ErrorCode::kKTooLarge:
            return "KTooLarge";
        case ErrorCode::kMismatchedResults:
            return "MismatchedResults";
        case ErrorCode::kLexiconTooSmall:
            return "LexiconTooSmall";
        case ErrorCode::kDegenerateRotation:
            return "DegenerateRotation";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {
}

void
fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace embedlens
