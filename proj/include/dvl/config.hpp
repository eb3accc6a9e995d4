#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "dvl/keyframe_map.hpp"
#include "dvl/tracker_config.hpp"

namespace dvl {

/// Flat view of a `key = value` text file. Keys below a `[section]` header
/// are stored as "section.key". '#' starts a comment.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text);
  static KeyValues read(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
};

/// Shortest text that parses back to exactly the same double.
std::string format_exact(double v);
/// 12 significant digits, used for reports.
std::string format_report(double v);

/// Everything a pipeline run can be configured with.
struct PipelineConfig {
  TrackerConfig tracker;
  KeyframeThresholds keyframes;
  /// Meters per depth PNG unit; overrides the dataset calibration when set.
  std::optional<double> depth_scale;
  /// A tracked pose may not move further than this multiple of the keyframe
  /// translation threshold from the motion prior.
  double max_prior_jump_factor = 5.0;
  /// Relocalization switches keyframes only when another one is nearer by
  /// more than this fraction of the translation threshold.
  double reloc_hysteresis_fraction = 0.01;
  /// Stereo block matching, used when the dataset has right images.
  int stereo_window = 7;
  int stereo_max_disparity = 64;

  /// Sections [tracker], [keyframes], [dataset], [pipeline], [stereo].
  static PipelineConfig from_key_values(const KeyValues& kv);
  static PipelineConfig load(const std::filesystem::path& path);
  /// Canonical text listing of every effective value.
  std::string canonical_text() const;
  /// FNV-1a of canonical_text(), as 16 hex digits.
  std::string hash() const;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace dvl
