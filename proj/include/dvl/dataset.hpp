#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dvl/appearance.hpp"
#include "dvl/camera.hpp"
#include "dvl/image.hpp"
#include "dvl/scene.hpp"

namespace dvl {

struct StampedPose {
  double timestamp = 0.0;
  Pose pose;  // world from camera
};

struct Calibration {
  CameraIntrinsics intrinsics;
  double baseline = 0.0;  // > 0 for stereo datasets
  double depth_scale = 1.0 / 5000.0;
};

/// One associated frame of a condition. `second` is a depth PNG for RGB-D
/// datasets and a right image for stereo ones.
struct FrameEntry {
  double timestamp = 0.0;
  std::string name;
  std::filesystem::path image;
  std::filesystem::path second;
  bool stereo = false;
};

/// Dataset directory:
///   calibration.txt           key = value: fu fv cu cv width height [baseline] [depth_scale]
///   groundtruth.txt           timestamp tx ty tz qx qy qz qw
///   <condition>/associations.txt   t rgb/<name>.png t depth/<name>.png   (or right/<name>.png)
///   <condition>/rgb/, depth/ or right/
///   <condition>/affine.txt    optional: <name> gain offset
struct DatasetLayout {
  std::filesystem::path root;
  Calibration calibration;
  std::vector<StampedPose> ground_truth;

  std::filesystem::path condition_dir(const std::string& condition) const { return root / condition; }
};

/// Throws DatasetError.
DatasetLayout open_dataset(const std::filesystem::path& root);
std::vector<std::string> list_conditions(const DatasetLayout& layout);
/// Validates that names are unique and timestamps strictly increasing.
std::vector<FrameEntry> read_associations(const DatasetLayout& layout, const std::string& condition);

struct LoadedFrame {
  ImageBuffer image;
  DepthMap depth;
};
/// Decodes one frame; stereo frames get depth from block matching.
LoadedFrame load_frame(const DatasetLayout& layout, const FrameEntry& entry, int stereo_window = 7,
                       int stereo_max_disparity = 64);

/// Ground-truth pose of each entry, matched by timestamp. Throws DatasetError.
std::vector<Pose> ground_truth_for(const DatasetLayout& layout, const std::vector<FrameEntry>& entries);

std::map<std::string, AffineParams> read_affine_metadata(const DatasetLayout& layout, const std::string& condition);
void write_affine_metadata(const std::filesystem::path& condition_dir, const std::vector<std::string>& names,
                           const std::vector<AffineParams>& params);

std::vector<StampedPose> read_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const std::vector<StampedPose>& poses);
void write_calibration(const std::filesystem::path& path, const Calibration& calibration);

/// Writes a rendered sequence as one condition. Calibration and ground truth
/// are written too (and must match if already present).
void write_rendered_condition(const std::filesystem::path& root, const std::string& condition,
                              const RenderedSequence& seq, const CameraIntrinsics& intrinsics,
                              double depth_scale = 1.0 / 5000.0);

/// Builds a condition from numbered frame files (VKITTI style): both
/// directories are listed, sorted, paired by position and copied in.
void import_numbered_frames(const std::filesystem::path& rgb_dir, const std::filesystem::path& depth_dir,
                            const std::filesystem::path& root, const std::string& condition, double frame_rate);

}  // namespace dvl
