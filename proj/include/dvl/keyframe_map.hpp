#pragma once

#include <filesystem>
#include <vector>

#include "dvl/keyframe.hpp"

namespace dvl {

struct KeyframeThresholds {
  double translation = 0.25;  // meters
  double rotation = 0.17453292519943295;  // radians (10 degrees)

  static KeyframeThresholds desk() { return {}; }
  static KeyframeThresholds street() { return {3.0, 0.08726646259971647}; }
};

/// Ordered, append-only list of keyframes. Ids are dense: keyframes[i].id == i.
struct KeyframeMap {
  std::vector<Keyframe> keyframes;
  KeyframeThresholds thresholds;
  CameraIntrinsics intrinsics;
  double depth_scale = kDefaultDepthScale;

  bool empty() const { return keyframes.empty(); }
  size_t size() const { return keyframes.size(); }
  int next_id() const { return static_cast<int>(keyframes.size()); }
  /// Throws DimensionMismatch when the id is not the next dense id.
  void append(Keyframe kf);
};

/// True when the translation between the poses exceeds the translation
/// threshold or the relative rotation angle exceeds the rotation threshold.
bool should_create_keyframe(const Pose& keyframe_pose, const Pose& current_pose, const KeyframeThresholds& thresholds);

/// Keyframe with the smallest Euclidean distance between translations; ties
/// go to the lower id. Throws EmptyMap.
const Keyframe& nearest_keyframe(const KeyframeMap& map, const Pose& pose);

/// Nearest-keyframe selection with hysteresis: the active keyframe is kept
/// unless another one is nearer by more than `margin` meters.
const Keyframe& select_keyframe(const KeyframeMap& map, const Pose& pose, int active_id, double margin);

inline constexpr int kMapFormatVersion = 1;

/// Directory container: manifest.txt plus per keyframe a 16-bit luminance
/// PNG, a 16-bit depth PNG and a 56-byte little-endian pose record.
void save_map(const KeyframeMap& map, const std::filesystem::path& dir);
/// Throws IoFailure or FormatVersionMismatch; never returns a partial map.
KeyframeMap load_map(const std::filesystem::path& dir, const TrackerConfig& cfg);

}  // namespace dvl
