#pragma once

#include <stdexcept>
#include <string>

namespace womv {

enum class ErrorCode {
  ParameterOutOfRange,
  OutOfOrderProgram,
  VoltageDecrease,
  AddressOutOfRange,
  UnmappedRead,
  PageNotProgrammable,
  DeviceFull,
  NoVictim,
  ParseError,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// All simulator failures surface as this exception; `code()` tells them apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace womv
