#pragma once

#include <stdexcept>
#include <string>

namespace packlab {

enum class ErrorCode {
  BAD_SPEC,
  NON_MONOTONE,
  OUT_OF_DOMAIN,
  EMPTY_GRID,
  NO_ROOT,
  SEPARATION_FAIL,
  NON_INCREASING,
  INVARIANT_FAIL,
  BAD_ADDRESS,
  LEVEL_UNRESOLVED,
  DEPTH_EXCEEDED,
  NOT_DISJOINT,
  TOO_MANY_CANDIDATES,
  EMPTY_INPUT,
  INVALID_SEQUENCE,
  SUM_TOO_SLOW,
  BAD_SEQUENCE,
  STAGE_FAIL,
  CONFIG_INVALID,
  IO_ERROR,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::BAD_SPEC: return "BAD_SPEC";
    case ErrorCode::NON_MONOTONE: return "NON_MONOTONE";
    case ErrorCode::OUT_OF_DOMAIN: return "OUT_OF_DOMAIN";
    case ErrorCode::EMPTY_GRID: return "EMPTY_GRID";
    case ErrorCode::NO_ROOT: return "NO_ROOT";
    case ErrorCode::SEPARATION_FAIL: return "SEPARATION_FAIL";
    case ErrorCode::NON_INCREASING: return "NON_INCREASING";
    case ErrorCode::INVARIANT_FAIL: return "INVARIANT_FAIL";
    case ErrorCode::BAD_ADDRESS: return "BAD_ADDRESS";
    case ErrorCode::LEVEL_UNRESOLVED: return "LEVEL_UNRESOLVED";
    case ErrorCode::DEPTH_EXCEEDED: return "DEPTH_EXCEEDED";
    case ErrorCode::NOT_DISJOINT: return "NOT_DISJOINT";
    case ErrorCode::TOO_MANY_CANDIDATES: return "TOO_MANY_CANDIDATES";
    case ErrorCode::EMPTY_INPUT: return "EMPTY_INPUT";
    case ErrorCode::INVALID_SEQUENCE: return "INVALID_SEQUENCE";
    case ErrorCode::SUM_TOO_SLOW: return "SUM_TOO_SLOW";
    case ErrorCode::BAD_SEQUENCE: return "BAD_SEQUENCE";
    case ErrorCode::STAGE_FAIL: return "STAGE_FAIL";
    case ErrorCode::CONFIG_INVALID: return "CONFIG_INVALID";
    case ErrorCode::IO_ERROR: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace packlab
