#pragma once

#include <stdexcept>
#include <string>

namespace circlerds {

enum class ErrorCode {
  DuplicatePoint,
  InvalidArc,
  InvalidPartition,
  LengthMismatch,
  InvalidHomeo,
  EverywhereFixed,
  IntervalOfFixedPoints,
  InvalidWeights,
  InvalidWord,
  BudgetExceeded,
  InvalidGrid,
  NoBottomSCC,
  DegenerateClassification,
  InvalidConfig,
  MissingMinimalSet,
  NondisjointSupports,
  SupportLeak,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::InvalidArc: return "InvalidArc";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidHomeo: return "InvalidHomeo";
    case ErrorCode::EverywhereFixed: return "EverywhereFixed";
    case ErrorCode::IntervalOfFixedPoints: return "IntervalOfFixedPoints";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::InvalidWord: return "InvalidWord";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NoBottomSCC: return "NoBottomSCC";
    case ErrorCode::DegenerateClassification: return "DegenerateClassification";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingMinimalSet: return "MissingMinimalSet";
    case ErrorCode::NondisjointSupports: return "NondisjointSupports";
    case ErrorCode::SupportLeak: return "SupportLeak";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// All library failures are reported through this exception; `code()` is the
/// stable discriminator, `what()` carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace circlerds
