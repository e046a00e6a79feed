// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#include "singlecodec/errors.h"

namespace singlecodec {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "InvalidInput";
    case ErrorCode::kConfigMismatch:
      return "ConfigMismatch";
    case ErrorCode::kShapeError:
      return "ShapeError";
    case ErrorCode::kNumericalError:
      return "NumericalError";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kFormatError:
      return "FormatError";
    case ErrorCode::kConfigError:
      return "ConfigError";
    case ErrorCode::kInsufficientData:
      return "InsufficientData";
    case ErrorCode::kIoError:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace singlecodec
