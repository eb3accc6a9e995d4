#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dvl {

enum class ErrorCode {
  NonPositiveDepth,
  NonPositiveDisparity,
  OutOfBounds,
  TooManyLevels,
  ImageTooSmall,
  DimensionMismatch,
  MissingFrame,
  ZeroGain,
  NoValidPixels,
  SingularNormalEquations,
  EmptyMap,
  IoFailure,
  FormatVersionMismatch,
  DegenerateScene,
  TrajectoryMismatch,
  DatasetError,
  AlignmentError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception; every failure carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dvl
