#include "opinion_loom/errors.hpp"

namespace opinion_loom {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::InvalidDegree: return "InvalidDegree";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SusceptibilityOutOfRange: return "SusceptibilityOutOfRange";
    case ErrorKind::OpinionOutOfRange: return "OpinionOutOfRange";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::TooFewRounds: return "TooFewRounds";
    case ErrorKind::EmptySupportRow: return "EmptySupportRow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnreachableScore: return "UnreachableScore";
    case ErrorKind::BackendFailure: return "BackendFailure";
    case ErrorKind::SidecarUnavailable: return "SidecarUnavailable";
    case ErrorKind::SidecarMalformedResponse: return "SidecarMalformedResponse";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace opinion_loom
