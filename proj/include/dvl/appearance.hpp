#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "dvl/image.hpp"

namespace dvl {

/// Per-pixel affine illumination change I' = gain * I + offset.
struct AffineParams {
  double gain = 1.0;
  double offset = 0.0;

  bool operator==(const AffineParams&) const = default;
};

struct IdentityTransform {};

/// Inverts a known affine illumination change: clamp((I - offset) / gain, 0, 1).
/// Frames listed in per_frame use their own parameters; all others use params.
struct AffineCorrection {
  AffineParams params;
  std::map<std::string, AffineParams> per_frame;

  const AffineParams& for_frame(std::string_view frame_id) const;
};

/// Frames transformed offline, looked up as <directory>/<frame_id>.png.
struct ExternalPrecomputed {
  std::filesystem::path directory;
};

using AppearanceTransform = std::variant<IdentityTransform, AffineCorrection, ExternalPrecomputed>;

/// <root>/<condition>-to-<canonical>
std::filesystem::path external_directory(const std::filesystem::path& root, std::string_view condition,
                                         std::string_view canonical);

/// Maps an image to its canonical-appearance estimate. Output has the input's
/// dimensions and values in [0, 1]. Throws MissingFrame or ZeroGain.
ImageBuffer apply(const AppearanceTransform& transform, const ImageBuffer& img, std::string_view frame_id);

/// clamp(gain * I + offset, 0, 1)
ImageBuffer apply_affine_change(const ImageBuffer& img, const AffineParams& params);

/// Scales so the target is covered, then crops the centre.
ImageBuffer resize_center_crop(const ImageBuffer& img, int width, int height);

/// "identity", "affine:a,b" or "external:<dir>".
std::string describe(const AppearanceTransform& transform);
/// Inverse of describe(); throws ConfigError on malformed input.
AppearanceTransform parse_transform(std::string_view text);

}  // namespace dvl
