#include "dvl/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dvl/error.hpp"

namespace dvl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::ConfigError, "bad section header on line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "expected key = value on line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::ConfigError, "empty key on line " + std::to_string(line_no));
    kv.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& KeyValues::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::ConfigError, "missing key '" + key + "'");
  return it->second;
}

double KeyValues::get_double(const std::string& key) const {
  const std::string& s = get(key);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "' is not a number: " + s);
  }
  return v;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValues::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "' is not an integer: " + s);
  }
  return v;
}

int KeyValues::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

std::string format_exact(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string format_report(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

PipelineConfig PipelineConfig::from_key_values(const KeyValues& kv) {
  PipelineConfig c;
  TrackerConfig& t = c.tracker;
  t.pyramid_levels = kv.get_int("tracker.pyramid_levels", t.pyramid_levels);
  t.huber_delta = kv.get_double("tracker.huber_delta", t.huber_delta);
  t.max_iterations_per_level = kv.get_int("tracker.max_iterations_per_level", t.max_iterations_per_level);
  t.step_norm_tolerance = kv.get_double("tracker.step_norm_tolerance", t.step_norm_tolerance);
  t.relative_cost_tolerance = kv.get_double("tracker.relative_cost_tolerance", t.relative_cost_tolerance);
  t.gradient_threshold = kv.get_double("tracker.gradient_threshold", t.gradient_threshold);
  t.image_noise_sigma = kv.get_double("tracker.image_noise_sigma", t.image_noise_sigma);
  t.depth_noise_k = kv.get_double("tracker.depth_noise_k", t.depth_noise_k);
  t.min_inlier_ratio = kv.get_double("tracker.min_inlier_ratio", t.min_inlier_ratio);
  t.inlier_threshold = kv.get_double("tracker.inlier_threshold", t.inlier_threshold);
  t.min_selected_pixels = kv.get_int("tracker.min_selected_pixels", t.min_selected_pixels);
  if (!t.valid()) throw Error(ErrorCode::ConfigError, "tracker settings must be positive");

  if (kv.has("keyframes.profile")) {
    const std::string& p = kv.get("keyframes.profile");
    if (p == "desk") {
      c.keyframes = KeyframeThresholds::desk();
    } else if (p == "street") {
      c.keyframes = KeyframeThresholds::street();
    } else {
      throw Error(ErrorCode::ConfigError, "unknown keyframe profile '" + p + "'");
    }
  }
  c.keyframes.translation = kv.get_double("keyframes.translation_m", c.keyframes.translation);
  if (kv.has("keyframes.rotation_deg")) c.keyframes.rotation = kv.get_double("keyframes.rotation_deg") * M_PI / 180.0;
  if (!(c.keyframes.translation > 0.0) || !(c.keyframes.rotation > 0.0)) {
    throw Error(ErrorCode::ConfigError, "keyframe thresholds must be positive");
  }

  if (kv.has("dataset.depth_scale")) {
    c.depth_scale = kv.get_double("dataset.depth_scale");
    if (!(*c.depth_scale > 0.0)) throw Error(ErrorCode::ConfigError, "depth_scale must be positive");
  }
  c.max_prior_jump_factor = kv.get_double("pipeline.max_prior_jump_factor", c.max_prior_jump_factor);
  c.reloc_hysteresis_fraction = kv.get_double("pipeline.reloc_hysteresis_fraction", c.reloc_hysteresis_fraction);
  c.stereo_window = kv.get_int("stereo.window", c.stereo_window);
  c.stereo_max_disparity = kv.get_int("stereo.max_disparity", c.stereo_max_disparity);
  for (const auto& [key, value] : kv.values()) {
    static const char* kKnown[] = {
        "tracker.pyramid_levels", "tracker.huber_delta", "tracker.max_iterations_per_level",
        "tracker.step_norm_tolerance", "tracker.relative_cost_tolerance", "tracker.gradient_threshold",
        "tracker.image_noise_sigma", "tracker.depth_noise_k", "tracker.min_inlier_ratio", "tracker.inlier_threshold",
        "tracker.min_selected_pixels", "keyframes.profile", "keyframes.translation_m", "keyframes.rotation_deg",
        "dataset.depth_scale", "pipeline.max_prior_jump_factor", "pipeline.reloc_hysteresis_fraction",
        "stereo.window", "stereo.max_disparity"};
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_key_values(KeyValues::read(path));
}

std::string PipelineConfig::canonical_text() const {
  std::ostringstream out;
  const TrackerConfig& t = tracker;
  out << "[tracker]\n"
      << "pyramid_levels = " << t.pyramid_levels << "\n"
      << "huber_delta = " << format_exact(t.huber_delta) << "\n"
      << "max_iterations_per_level = " << t.max_iterations_per_level << "\n"
      << "step_norm_tolerance = " << format_exact(t.step_norm_tolerance) << "\n"
      << "relative_cost_tolerance = " << format_exact(t.relative_cost_tolerance) << "\n"
      << "gradient_threshold = " << format_exact(t.gradient_threshold) << "\n"
      << "image_noise_sigma = " << format_exact(t.image_noise_sigma) << "\n"
      << "depth_noise_k = " << format_exact(t.depth_noise_k) << "\n"
      << "min_inlier_ratio = " << format_exact(t.min_inlier_ratio) << "\n"
      << "inlier_threshold = " << format_exact(t.inlier_threshold) << "\n"
      << "min_selected_pixels = " << t.min_selected_pixels << "\n"
      << "[keyframes]\n"
      << "translation_m = " << format_exact(keyframes.translation) << "\n"
      << "rotation_deg = " << format_exact(keyframes.rotation * 180.0 / M_PI) << "\n"
      << "[dataset]\n"
      << "depth_scale = " << (depth_scale ? format_exact(*depth_scale) : std::string("calibration")) << "\n"
      << "[pipeline]\n"
      << "max_prior_jump_factor = " << format_exact(max_prior_jump_factor) << "\n"
      << "reloc_hysteresis_fraction = " << format_exact(reloc_hysteresis_fraction) << "\n"
      << "[stereo]\n"
      << "window = " << stereo_window << "\n"
      << "max_disparity = " << stereo_max_disparity << "\n";
  return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string PipelineConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text())));
  return buf;
}

}  // namespace dvl
