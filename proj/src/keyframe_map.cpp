#include "dvl/keyframe_map.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dvl/config.hpp"
#include "dvl/error.hpp"

namespace dvl {

namespace {

constexpr size_t kPoseRecordBytes = 7 * sizeof(double);

std::string keyframe_stem(int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "kf_%06d", id);
  return buf;
}

void put_le(double v, unsigned char* out) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(bits >> (8 * i));
}

double get_le(const unsigned char* in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void KeyframeMap::append(Keyframe kf) {
  if (kf.id != next_id()) {
    throw Error(ErrorCode::DimensionMismatch, "keyframe id " + std::to_string(kf.id) + " is not dense");
  }
  keyframes.push_back(std::move(kf));
}

bool should_create_keyframe(const Pose& keyframe_pose, const Pose& current_pose, const KeyframeThresholds& thresholds) {
  const double dist = (current_pose.translation - keyframe_pose.translation).norm();
  const double angle = rotation_angle(compose(inverse(keyframe_pose), current_pose));
  return dist > thresholds.translation || angle > thresholds.rotation;
}

const Keyframe& nearest_keyframe(const KeyframeMap& map, const Pose& pose) {
  if (map.empty()) throw Error(ErrorCode::EmptyMap, "nearest keyframe query on an empty map");
  const Keyframe* best = &map.keyframes.front();
  double best_d = (best->pose.translation - pose.translation).squaredNorm();
  for (const Keyframe& kf : map.keyframes) {
    const double d = (kf.pose.translation - pose.translation).squaredNorm();
    if (d < best_d || (d == best_d && kf.id < best->id)) {
      best = &kf;
      best_d = d;
    }
  }
  return *best;
}

const Keyframe& select_keyframe(const KeyframeMap& map, const Pose& pose, int active_id, double margin) {
  const Keyframe& nearest = nearest_keyframe(map, pose);
  if (active_id < 0 || active_id >= static_cast<int>(map.size()) || nearest.id == active_id) return nearest;
  const Keyframe& active = map.keyframes[active_id];
  const double d_active = (active.pose.translation - pose.translation).norm();
  const double d_nearest = (nearest.pose.translation - pose.translation).norm();
  return d_nearest < d_active - margin ? nearest : active;
}

void save_map(const KeyframeMap& map, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "keyframes", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream manifest;
  manifest << "# keyframe map\n"
           << "format_version = " << kMapFormatVersion << "\n"
           << "pose_convention = world_from_keyframe; translation xyz; quaternion xyzw; little-endian float64\n"
           << "perturbation = left; twist order v,omega\n"
           << "fu = " << format_exact(map.intrinsics.fu) << "\n"
           << "fv = " << format_exact(map.intrinsics.fv) << "\n"
           << "cu = " << format_exact(map.intrinsics.cu) << "\n"
           << "cv = " << format_exact(map.intrinsics.cv) << "\n"
           << "width = " << map.intrinsics.width << "\n"
           << "height = " << map.intrinsics.height << "\n"
           << "depth_scale = " << format_exact(map.depth_scale) << "\n"
           << "translation_threshold = " << format_exact(map.thresholds.translation) << "\n"
           << "rotation_threshold = " << format_exact(map.thresholds.rotation) << "\n"
           << "keyframe_count = " << map.size() << "\n";

  for (const Keyframe& kf : map.keyframes) {
    const std::string stem = keyframe_stem(kf.id);
    manifest << "[" << stem << "]\n"
             << "source_frame = " << kf.source_frame << "\n";
    save_image_png(dir / "keyframes" / (stem + "_image.png"), kf.image, 16);
    save_depth_png(dir / "keyframes" / (stem + "_depth.png"), kf.depth, map.depth_scale);

    unsigned char record[kPoseRecordBytes];
    const Eigen::Vector4d q = rotation_to_quaternion_xyzw(kf.pose.rotation);
    const double values[7] = {kf.pose.translation.x(), kf.pose.translation.y(), kf.pose.translation.z(),
                              q[0], q[1], q[2], q[3]};
    for (int i = 0; i < 7; ++i) put_le(values[i], record + 8 * i);
    std::ofstream out(dir / "keyframes" / (stem + "_pose.bin"), std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(record), kPoseRecordBytes);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write pose record for " + stem);
  }

  std::ofstream out(dir / "manifest.txt", std::ios::trunc);
  out << manifest.str();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest in " + dir.string());
}

KeyframeMap load_map(const std::filesystem::path& dir, const TrackerConfig& cfg) {
  if (!std::filesystem::exists(dir / "manifest.txt")) {
    throw Error(ErrorCode::IoFailure, "no manifest in " + dir.string());
  }
  KeyValues kv;
  try {
    kv = KeyValues::read(dir / "manifest.txt");
  } catch (const Error& e) {
    throw Error(ErrorCode::FormatVersionMismatch, e.what());
  }
  if (!kv.has("format_version") || kv.get("format_version") != std::to_string(kMapFormatVersion)) {
    throw Error(ErrorCode::FormatVersionMismatch, "unsupported or missing map format version");
  }

  KeyframeMap map;
  int count = 0;
  try {
    map.intrinsics.fu = kv.get_double("fu");
    map.intrinsics.fv = kv.get_double("fv");
    map.intrinsics.cu = kv.get_double("cu");
    map.intrinsics.cv = kv.get_double("cv");
    map.intrinsics.width = kv.get_int("width");
    map.intrinsics.height = kv.get_int("height");
    map.depth_scale = kv.get_double("depth_scale");
    map.thresholds.translation = kv.get_double("translation_threshold");
    map.thresholds.rotation = kv.get_double("rotation_threshold");
    count = kv.get_int("keyframe_count");
  } catch (const Error& e) {
    throw Error(ErrorCode::FormatVersionMismatch, std::string("incomplete manifest: ") + e.what());
  }
  if (count < 0) throw Error(ErrorCode::FormatVersionMismatch, "negative keyframe count");

  for (int id = 0; id < count; ++id) {
    const std::string stem = keyframe_stem(id);
    if (!kv.has(stem + ".source_frame")) {
      throw Error(ErrorCode::FormatVersionMismatch, "manifest lacks entry for " + stem);
    }
    std::ifstream in(dir / "keyframes" / (stem + "_pose.bin"), std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "missing pose record for " + stem);
    unsigned char record[kPoseRecordBytes + 1];
    in.read(reinterpret_cast<char*>(record), kPoseRecordBytes + 1);
    if (in.gcount() != static_cast<std::streamsize>(kPoseRecordBytes)) {
      throw Error(ErrorCode::FormatVersionMismatch, "pose record for " + stem + " has the wrong size");
    }
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = get_le(record + 8 * i);

    Keyframe kf;
    kf.id = id;
    kf.source_frame = kv.get(stem + ".source_frame");
    kf.pose.translation = Vec3(v[0], v[1], v[2]);
    kf.pose.rotation = quaternion_xyzw_to_rotation(Eigen::Vector4d(v[3], v[4], v[5], v[6]));
    kf.intrinsics = map.intrinsics;
    kf.depth_scale = map.depth_scale;
    kf.image = load_image_png(dir / "keyframes" / (stem + "_image.png"));
    kf.depth = load_depth_png(dir / "keyframes" / (stem + "_depth.png"), map.depth_scale);
    if (kf.image.channels != 1 || kf.image.width != map.intrinsics.width ||
        kf.image.height != map.intrinsics.height || kf.depth.width != kf.image.width ||
        kf.depth.height != kf.image.height) {
      throw Error(ErrorCode::FormatVersionMismatch, "keyframe payload dimensions disagree for " + stem);
    }
    rebuild_levels(kf, cfg);
    map.keyframes.push_back(std::move(kf));
  }
  return map;
}

}  // namespace dvl
