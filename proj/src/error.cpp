#include "womv/error.hpp"

namespace womv {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::OutOfOrderProgram: return "OutOfOrderProgram";
    case ErrorCode::VoltageDecrease: return "VoltageDecrease";
    case ErrorCode::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorCode::UnmappedRead: return "UnmappedRead";
    case ErrorCode::PageNotProgrammable: return "PageNotProgrammable";
    case ErrorCode::DeviceFull: return "DeviceFull";
    case ErrorCode::NoVictim: return "NoVictim";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace womv
