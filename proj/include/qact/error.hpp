#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qact {

enum class ErrorKind {
  NotHermitian,
  NotPSD,
  TraceNotOne,
  DimMismatch,
  NotNormalized,
  NotUnitary,
  BadSubsystemIndex,
  BadCut,
  BadDimension,
  NonUniformDims,
  LengthMismatch,
  NotTwoQubits,
  NotClassical,
  BadConfig,
  Schema,
  BadParameter,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::TraceNotOne: return "TraceNotOne";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::BadSubsystemIndex: return "BadSubsystemIndex";
    case ErrorKind::BadCut: return "BadCut";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::NonUniformDims: return "NonUniformDims";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NotTwoQubits: return "NotTwoQubits";
    case ErrorKind::NotClassical: return "NotClassical";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::Schema: return "Schema";
    case ErrorKind::BadParameter: return "BadParameter";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` names the violated
/// invariant and `what()` carries the measured deviation where there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qact
