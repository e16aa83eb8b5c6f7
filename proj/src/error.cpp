#include "gaitanno/error.hpp"

namespace gaitanno {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::PointBehindCamera: return "PointBehindCamera";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::ZeroPosition: return "ZeroPosition";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::NotEnoughRays: return "NotEnoughRays";
    case ErrorKind::DegenerateRays: return "DegenerateRays";
    case ErrorKind::TooFewConfidentViews: return "TooFewConfidentViews";
    case ErrorKind::EmptySession: return "EmptySession";
    case ErrorKind::MissingInitialPose: return "MissingInitialPose";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoLabels: return "NoLabels";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Divergence:
    case ErrorKind::NumericalFailure:
    case ErrorKind::DegenerateRays:
    case ErrorKind::DegenerateConfiguration:
      return true;
    default:
      return false;
  }
}

}  // namespace gaitanno
