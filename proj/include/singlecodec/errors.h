// Copyright 2026 The singlecodec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SINGLECODEC_ERRORS_H_
#define SINGLECODEC_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace singlecodec {

// Machine-parsable error categories. The CLI prints the code name on
// failure, so the names are part of the external interface.
enum class ErrorCode {
  kInvalidInput,
  kConfigMismatch,
  kShapeError,
  kNumericalError,
  kParseError,
  kFormatError,
  kConfigError,
  kInsufficientData,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define SC_DEFINE_ERROR(Name, Code)                               \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message)                     \
        : Error(ErrorCode::Code, message) {}                      \
  };

SC_DEFINE_ERROR(InvalidInput, kInvalidInput)
SC_DEFINE_ERROR(ConfigMismatch, kConfigMismatch)
SC_DEFINE_ERROR(ShapeError, kShapeError)
SC_DEFINE_ERROR(NumericalError, kNumericalError)
SC_DEFINE_ERROR(ParseError, kParseError)
SC_DEFINE_ERROR(FormatError, kFormatError)
SC_DEFINE_ERROR(ConfigError, kConfigError)
SC_DEFINE_ERROR(InsufficientData, kInsufficientData)
SC_DEFINE_ERROR(IoError, kIoError)

#undef SC_DEFINE_ERROR

}  // namespace singlecodec

#endif  // SINGLECODEC_ERRORS_H_
