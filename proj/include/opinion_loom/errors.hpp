#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opinion_loom {

enum class ErrorKind {
  NegativeEntry,
  RowSumViolation,
  SupportViolation,
  InvalidDegree,
  DimensionMismatch,
  SusceptibilityOutOfRange,
  OpinionOutOfRange,
  NonFiniteInput,
  TooFewRounds,
  EmptySupportRow,
  InvalidArgument,
  UnreachableScore,
  BackendFailure,
  SidecarUnavailable,
  SidecarMalformedResponse,
  ConfigError,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the
// CLI exit path) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace opinion_loom
