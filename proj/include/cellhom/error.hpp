#pragma once

#include <stdexcept>
#include <string>

namespace cellhom {

enum class ErrorCode {
  UnsupportedDimension,
  EmptyGraph,
  DanglingIdentification,
  NonpositiveLengthOrWeight,
  UnknownCatalogId,
  MissingParameter,
  NonpositiveScale,
  ResolutionTooSmall,
  DimensionMismatch,
  BallOutsideRegion,
  InsufficientPairs,
  ProblemTooLarge,
  UnsupportedRegion,
  InvalidConfig,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnsupportedDimension: return "unsupported-dimension";
    case ErrorCode::EmptyGraph: return "empty-graph";
    case ErrorCode::DanglingIdentification: return "dangling-identification";
    case ErrorCode::NonpositiveLengthOrWeight: return "nonpositive-length-or-weight";
    case ErrorCode::UnknownCatalogId: return "unknown-catalog-id";
    case ErrorCode::MissingParameter: return "missing-parameter";
    case ErrorCode::NonpositiveScale: return "nonpositive-scale";
    case ErrorCode::ResolutionTooSmall: return "resolution-too-small";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::BallOutsideRegion: return "ball-outside-region";
    case ErrorCode::InsufficientPairs: return "insufficient-pairs";
    case ErrorCode::ProblemTooLarge: return "problem-too-large";
    case ErrorCode::UnsupportedRegion: return "unsupported-region";
    case ErrorCode::InvalidConfig: return "invalid-config";
  }
  return "unknown-error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), m_code(code) {}

  ErrorCode code() const noexcept { return m_code; }

 private:
  ErrorCode m_code;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace cellhom
