#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitanno {

// Every failure the library reports carries one of these kinds so callers
// (the CLI exit code, the HTTP service's 422 body) can branch on it.
enum class ErrorKind {
  InvalidArgument,
  PointBehindCamera,
  UnsupportedModel,
  ZeroPosition,
  InsufficientPoints,
  DegenerateConfiguration,
  Divergence,
  NotEnoughRays,
  DegenerateRays,
  TooFewConfidentViews,
  EmptySession,
  MissingInitialPose,
  NumericalFailure,
  EmptyGrid,
  LengthMismatch,
  EmptyInput,
  NoLabels,
  NoOverlap,
  ParseError,
  SchemaVersionMismatch,
  NotFound,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Numerical failures map to CLI exit code 3, everything else to 2.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace gaitanno
