#include "dvl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dvl/config.hpp"
#include "dvl/error.hpp"
#include "dvl/png_io.hpp"

namespace fs = std::filesystem;

namespace dvl {

namespace {

constexpr double kTimestampTolerance = 1e-6;

[[noreturn]] void dataset_fail(const std::string& what) { throw Error(ErrorCode::DatasetError, what); }

std::vector<std::string> data_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) dataset_fail("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(line);
  }
  return out;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DatasetLayout open_dataset(const fs::path& root) {
  DatasetLayout layout;
  layout.root = root;
  if (!fs::is_directory(root)) dataset_fail("not a directory: " + root.string());
  try {
    const KeyValues kv = KeyValues::read(root / "calibration.txt");
    Calibration& c = layout.calibration;
    c.intrinsics.fu = kv.get_double("fu");
    c.intrinsics.fv = kv.get_double("fv");
    c.intrinsics.cu = kv.get_double("cu");
    c.intrinsics.cv = kv.get_double("cv");
    c.intrinsics.width = kv.get_int("width");
    c.intrinsics.height = kv.get_int("height");
    c.baseline = kv.get_double("baseline", 0.0);
    c.depth_scale = kv.get_double("depth_scale", c.depth_scale);
  } catch (const Error& e) {
    dataset_fail(std::string("calibration: ") + e.what());
  }
  if (!layout.calibration.intrinsics.valid()) dataset_fail("calibration intrinsics are invalid");
  try {
    layout.ground_truth = read_trajectory(root / "groundtruth.txt");
  } catch (const Error& e) {
    dataset_fail(std::string("ground truth: ") + e.what());
  }
  return layout;
}

std::vector<std::string> list_conditions(const DatasetLayout& layout) {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(layout.root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "associations.txt")) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FrameEntry> read_associations(const DatasetLayout& layout, const std::string& condition) {
  const fs::path dir = layout.condition_dir(condition);
  if (!fs::exists(dir / "associations.txt")) dataset_fail("condition '" + condition + "' not found");
  std::vector<FrameEntry> entries;
  std::set<std::string> names;
  std::set<std::string> seconds;
  for (const std::string& line : data_lines(dir / "associations.txt")) {
    std::istringstream in(line);
    FrameEntry e;
    double t2 = 0.0;
    std::string first, second;
    if (!(in >> e.timestamp >> first >> t2 >> second)) dataset_fail("malformed association: " + line);
    e.image = dir / first;
    e.second = dir / second;
    e.name = fs::path(first).stem().string();
    e.stereo = fs::path(second).parent_path().filename() == "right";
    if (!entries.empty() && !(e.timestamp > entries.back().timestamp)) {
      dataset_fail("timestamps not strictly increasing at " + e.name);
    }
    if (!names.insert(e.name).second || !seconds.insert(second).second) {
      dataset_fail("association is not one-to-one at " + e.name);
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) dataset_fail("condition '" + condition + "' has no frames");
  return entries;
}

LoadedFrame load_frame(const DatasetLayout& layout, const FrameEntry& entry, int stereo_window,
                       int stereo_max_disparity) {
  LoadedFrame f;
  const CameraIntrinsics& k = layout.calibration.intrinsics;
  try {
    f.image = load_image_png(entry.image);
    if (entry.stereo) {
      if (!(layout.calibration.baseline > 0.0)) dataset_fail("stereo frames need a positive baseline");
      const ImageBuffer right = load_image_png(entry.second);
      const StereoModel stereo{k, layout.calibration.baseline};
      f.depth = disparity_to_depth_map(block_match_disparity(f.image, right, stereo, stereo_window,
                                                             stereo_max_disparity), stereo);
    } else {
      f.depth = load_depth_png(entry.second, layout.calibration.depth_scale);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DatasetError) throw;
    dataset_fail(std::string("frame ") + entry.name + ": " + e.what());
  }
  if (f.image.width != k.width || f.image.height != k.height || f.depth.width != k.width ||
      f.depth.height != k.height) {
    dataset_fail("frame " + entry.name + " does not match the calibrated size");
  }
  return f;
}

std::vector<Pose> ground_truth_for(const DatasetLayout& layout, const std::vector<FrameEntry>& entries) {
  std::vector<Pose> out;
  out.reserve(entries.size());
  size_t j = 0;
  for (const FrameEntry& e : entries) {
    while (j < layout.ground_truth.size() && layout.ground_truth[j].timestamp < e.timestamp - kTimestampTolerance) ++j;
    if (j == layout.ground_truth.size() ||
        std::abs(layout.ground_truth[j].timestamp - e.timestamp) > kTimestampTolerance) {
      dataset_fail("no ground truth for frame " + e.name);
    }
    out.push_back(layout.ground_truth[j].pose);
  }
  return out;
}

std::map<std::string, AffineParams> read_affine_metadata(const DatasetLayout& layout, const std::string& condition) {
  std::map<std::string, AffineParams> out;
  const fs::path path = layout.condition_dir(condition) / "affine.txt";
  if (!fs::exists(path)) return out;
  for (const std::string& line : data_lines(path)) {
    std::istringstream in(line);
    std::string name;
    AffineParams p;
    if (!(in >> name >> p.gain >> p.offset)) dataset_fail("malformed affine metadata: " + line);
    out[name] = p;
  }
  return out;
}

void write_affine_metadata(const fs::path& condition_dir, const std::vector<std::string>& names,
                           const std::vector<AffineParams>& params) {
  std::ofstream out(condition_dir / "affine.txt", std::ios::trunc);
  out << "# frame gain offset   (I' = gain * I + offset, clamped to [0,1])\n";
  for (size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ' ' << format_exact(params[i].gain) << ' ' << format_exact(params[i].offset) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write affine metadata in " + condition_dir.string());
}

std::vector<StampedPose> read_trajectory(const fs::path& path) {
  std::vector<StampedPose> out;
  for (const std::string& line : data_lines(path)) {
    std::istringstream in(line);
    StampedPose sp;
    double v[7];
    if (!(in >> sp.timestamp >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5] >> v[6])) {
      dataset_fail("malformed trajectory line in " + path.string() + ": " + line);
    }
    sp.pose.translation = Vec3(v[0], v[1], v[2]);
    sp.pose.rotation = quaternion_xyzw_to_rotation(Eigen::Vector4d(v[3], v[4], v[5], v[6]));
    out.push_back(sp);
  }
  return out;
}

void write_trajectory(const fs::path& path, const std::vector<StampedPose>& poses) {
  std::ofstream out(path, std::ios::trunc);
  out << "# timestamp tx ty tz qx qy qz qw (world from camera, left perturbation T <- exp(xi) T)\n";
  for (const StampedPose& sp : poses) {
    const Eigen::Vector4d q = rotation_to_quaternion_xyzw(sp.pose.rotation);
    out << format_exact(sp.timestamp);
    for (int i = 0; i < 3; ++i) out << ' ' << format_exact(sp.pose.translation[i]);
    for (int i = 0; i < 4; ++i) out << ' ' << format_exact(q[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

void write_calibration(const fs::path& path, const Calibration& c) {
  std::ofstream out(path, std::ios::trunc);
  out << "fu = " << format_exact(c.intrinsics.fu) << "\n"
      << "fv = " << format_exact(c.intrinsics.fv) << "\n"
      << "cu = " << format_exact(c.intrinsics.cu) << "\n"
      << "cv = " << format_exact(c.intrinsics.cv) << "\n"
      << "width = " << c.intrinsics.width << "\n"
      << "height = " << c.intrinsics.height << "\n"
      << "baseline = " << format_exact(c.baseline) << "\n"
      << "depth_scale = " << format_exact(c.depth_scale) << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

void write_rendered_condition(const fs::path& root, const std::string& condition, const RenderedSequence& seq,
                              const CameraIntrinsics& intrinsics, double depth_scale) {
  const fs::path dir = root / condition;
  std::error_code ec;
  fs::create_directories(dir / "rgb", ec);
  fs::create_directories(dir / "depth", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());

  Calibration calib;
  calib.intrinsics = intrinsics;
  calib.depth_scale = depth_scale;
  const fs::path calib_path = root / "calibration.txt";
  const fs::path tmp_calib = root / "calibration.txt.tmp";
  write_calibration(tmp_calib, calib);
  if (fs::exists(calib_path) && read_all(calib_path) != read_all(tmp_calib)) {
    fs::remove(tmp_calib);
    throw Error(ErrorCode::DatasetError, "existing calibration differs from the rendered camera");
  }
  fs::rename(tmp_calib, calib_path);

  std::vector<StampedPose> gt;
  for (size_t i = 0; i < seq.poses.size(); ++i) gt.push_back({seq.timestamps[i], seq.poses[i]});
  const fs::path gt_path = root / "groundtruth.txt";
  const fs::path tmp_gt = root / "groundtruth.txt.tmp";
  write_trajectory(tmp_gt, gt);
  if (fs::exists(gt_path) && read_all(gt_path) != read_all(tmp_gt)) {
    fs::remove(tmp_gt);
    throw Error(ErrorCode::TrajectoryMismatch, "existing ground truth differs from the rendered trajectory");
  }
  fs::rename(tmp_gt, gt_path);

  std::ofstream assoc(dir / "associations.txt", std::ios::trunc);
  for (size_t i = 0; i < seq.images.size(); ++i) {
    const std::string& name = seq.frame_names[i];
    save_image_png(dir / "rgb" / (name + ".png"), seq.images[i], 8);
    save_depth_png(dir / "depth" / (name + ".png"), seq.depths[i], depth_scale);
    const std::string t = format_exact(seq.timestamps[i]);
    assoc << t << " rgb/" << name << ".png " << t << " depth/" << name << ".png\n";
  }
  if (!assoc) throw Error(ErrorCode::IoFailure, "cannot write associations in " + dir.string());
  if (!seq.affine.empty()) write_affine_metadata(dir, seq.frame_names, seq.affine);
}

void import_numbered_frames(const fs::path& rgb_dir, const fs::path& depth_dir, const fs::path& root,
                            const std::string& condition, double frame_rate) {
  const auto list = [](const fs::path& d) {
    std::vector<fs::path> files;
    if (!fs::is_directory(d)) dataset_fail("not a directory: " + d.string());
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  const std::vector<fs::path> rgb = list(rgb_dir);
  const std::vector<fs::path> depth = list(depth_dir);
  if (rgb.size() != depth.size() || rgb.empty()) dataset_fail("rgb and depth frame counts differ or are zero");
  const fs::path dir = root / condition;
  std::error_code ec;
  fs::create_directories(dir / "rgb", ec);
  fs::create_directories(dir / "depth", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  std::ofstream assoc(dir / "associations.txt", std::ios::trunc);
  for (size_t i = 0; i < rgb.size(); ++i) {
    const std::string name = rgb[i].stem().string();
    fs::copy_file(rgb[i], dir / "rgb" / (name + ".png"), fs::copy_options::overwrite_existing);
    fs::copy_file(depth[i], dir / "depth" / (name + ".png"), fs::copy_options::overwrite_existing);
    const std::string t = format_exact(static_cast<double>(i) / frame_rate);
    assoc << t << " rgb/" << name << ".png " << t << " depth/" << name << ".png\n";
  }
  if (!assoc) throw Error(ErrorCode::IoFailure, "cannot write associations in " + dir.string());
}

}  // namespace dvl
