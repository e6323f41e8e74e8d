#include "picres/errors.hpp"

namespace picres {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingCell: return "MissingCell";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::TerminalMismatch: return "TerminalMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::NotSPD: return "NotSPD";
    case ErrorKind::SingularObservedBlock: return "SingularObservedBlock";
    case ErrorKind::InvalidDof: return "InvalidDof";
    case ErrorKind::ParamOutOfDomain: return "ParamOutOfDomain";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::BoundaryInput: return "BoundaryInput";
    case ErrorKind::ScaleOrderingViolated: return "ScaleOrderingViolated";
    case ErrorKind::SingularTransform: return "SingularTransform";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NaNInput: return "NaNInput";
    case ErrorKind::InsufficientChains: return "InsufficientChains";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::MissingTrace: return "MissingTrace";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IOError: return "IOError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

}  // namespace picres
