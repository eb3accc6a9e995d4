#include "dvl/error.hpp"

namespace dvl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::NonPositiveDisparity: return "NonPositiveDisparity";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::TooManyLevels: return "TooManyLevels";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::ZeroGain: return "ZeroGain";
    case ErrorCode::NoValidPixels: return "NoValidPixels";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::EmptyMap: return "EmptyMap";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::DegenerateScene: return "DegenerateScene";
    case ErrorCode::TrajectoryMismatch: return "TrajectoryMismatch";
    case ErrorCode::DatasetError: return "DatasetError";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace dvl
