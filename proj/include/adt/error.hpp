#pragma once

#include <stdexcept>
#include <string>

namespace adt {

// Error categories. Each maps to a distinct CLI exit code.
enum class ErrorCode : int {
  kMalformedDocument = 4,
  kInvalidTree = 5,
  kConfigMismatch = 6,
  kDimensionMismatch = 7,
  kInvalidArgument = 8,
  kNotBicausal = 9,
  kStaleTable = 10,
  kInsufficientResolution = 11,
  kExpression = 12,
  kNotMarkov = 13,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "malformed document";
    case ErrorCode::kInvalidTree: return "invalid tree";
    case ErrorCode::kConfigMismatch: return "config mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNotBicausal: return "coupling not bicausal";
    case ErrorCode::kStaleTable: return "stale table";
    case ErrorCode::kInsufficientResolution: return "insufficient grid resolution";
    case ErrorCode::kExpression: return "expression error";
    case ErrorCode::kNotMarkov: return "process not Markov";
  }
  return "error";
}

}  // namespace adt
