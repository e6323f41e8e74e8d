#pragma once

#include <stdexcept>
#include <string>

namespace picres {

enum class ErrorKind {
  MissingCell,
  NonPositiveValue,
  ShapeMismatch,
  TerminalMismatch,
  LengthMismatch,
  EmptyList,
  NotSPD,
  SingularObservedBlock,
  InvalidDof,
  ParamOutOfDomain,
  DimensionTooLarge,
  BoundaryInput,
  ScaleOrderingViolated,
  SingularTransform,
  DimMismatch,
  NaNInput,
  InsufficientChains,
  TooShort,
  MissingTrace,
  ParseError,
  ConfigError,
  IOError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace picres
