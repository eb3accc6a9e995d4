// Command-line front end: visual odometry, relocalization, dataset tools.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dvl/config.hpp"
#include "dvl/dataset.hpp"
#include "dvl/error.hpp"
#include "dvl/evaluation.hpp"
#include "dvl/keyframe_map.hpp"
#include "dvl/pipeline.hpp"
#include "dvl/scene.hpp"

namespace fs = std::filesystem;
using namespace dvl;

namespace {

constexpr int kExitUserError = 1;
constexpr int kExitInternalError = 2;

bool is_user_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DatasetError:
    case ErrorCode::ConfigError:
    case ErrorCode::IoFailure:
    case ErrorCode::FormatVersionMismatch:
    case ErrorCode::MissingFrame:
    case ErrorCode::AlignmentError:
    case ErrorCode::EmptyMap:
    case ErrorCode::ZeroGain:
      return true;
    default:
      return false;
  }
}

PipelineConfig load_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : PipelineConfig::load(path);
}

// "tx,ty,tz,qx,qy,qz,qw"
Pose parse_pose(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad pose component '" + item + "'");
    }
  }
  if (v.size() != 7) throw Error(ErrorCode::ConfigError, "pose needs 7 comma-separated values: tx,ty,tz,qx,qy,qz,qw");
  Pose p;
  p.translation = Vec3(v[0], v[1], v[2]);
  p.rotation = quaternion_xyzw_to_rotation(Eigen::Vector4d(v[3], v[4], v[5], v[6]));
  return p;
}

void write_outputs(const RunResult& run, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out.string());
  export_report(run.report, out);
  write_trajectory(out / "trajectory.txt", run.trajectory);
}

void print_summary(const EvaluationReport& r) {
  std::printf("frames tracked: %zu/%zu (%s%%)\n", r.frames_tracked, r.frames_total,
              format_report(r.frames_tracked_pct).c_str());
  std::printf("avg trans err: %s %% dist\n", format_report(r.avg_trans_err_pct_dist).c_str());
  std::printf("avg rot err: %s deg/m\n", format_report(r.avg_rot_err_deg_per_m).c_str());
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "clone", "light", "dark" or "name:a,b"
std::vector<std::pair<std::string, AffineParams>> parse_affine_list(const std::vector<std::string>& items) {
  const auto standard = standard_affine_conditions();
  std::vector<std::pair<std::string, AffineParams>> out;
  for (const std::string& item : items) {
    const size_t colon = item.find(':');
    if (colon == std::string::npos) {
      auto it = std::find_if(standard.begin(), standard.end(), [&](const auto& c) { return c.first == item; });
      if (it == standard.end()) throw Error(ErrorCode::ConfigError, "unknown affine condition '" + item + "'");
      out.push_back(*it);
      continue;
    }
    const AppearanceTransform t = parse_transform("affine:" + item.substr(colon + 1));
    out.emplace_back(item.substr(0, colon), std::get<AffineCorrection>(t).params);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct photometric visual odometry and relocalization"};
  app.require_subcommand(1);

  std::string dataset, condition, transform = "identity", map_dir, config_path, output, initial_pose = "gt";

  auto* vo = app.add_subcommand("vo", "Run visual odometry on one condition");
  vo->add_option("--dataset", dataset, "Dataset root")->required();
  vo->add_option("--condition", condition, "Condition directory")->required();
  vo->add_option("--transform", transform, "identity | affine:a,b | affine:meta | external:<dir>");
  vo->add_option("--config", config_path, "Configuration file");
  vo->add_option("--output", output, "Report directory")->required();
  vo->add_option("--map", map_dir, "Save the keyframe map here");

  auto* reloc = app.add_subcommand("reloc", "Relocalize a condition against a saved map");
  reloc->add_option("--dataset", dataset, "Dataset root")->required();
  reloc->add_option("--condition", condition, "Condition directory")->required();
  reloc->add_option("--map", map_dir, "Keyframe map directory")->required();
  reloc->add_option("--transform", transform, "identity | affine:a,b | affine:meta | external:<dir>");
  reloc->add_option("--initial-pose", initial_pose, "'gt' (first ground-truth pose) or tx,ty,tz,qx,qy,qz,qw");
  reloc->add_option("--config", config_path, "Configuration file");
  reloc->add_option("--output", output, "Report directory")->required();

  std::string source = "static";
  std::vector<std::string> affine_items{"clone", "light", "dark"};
  auto* make_affine = app.add_subcommand("make-affine", "Write affine-transformed copies of a condition");
  make_affine->add_option("--dataset", dataset, "Dataset root")->required();
  make_affine->add_option("--condition", source, "Source condition");
  make_affine->add_option("--targets", affine_items, "Any of clone, light, dark or name:a,b (space separated)");

  int frames = 100;
  std::string render_conditions = "static,global,local,flashlight";
  auto* render = app.add_subcommand("render-synthetic", "Render the synthetic desk scene as a dataset");
  render->add_option("--output", output, "Dataset root to write")->required();
  render->add_option("--frames", frames, "Frames per condition")->check(CLI::Range(2, 100000));
  render->add_option("--conditions", render_conditions, "Comma list of static, global, local, flashlight");

  std::string trajectory_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a trajectory file against ground truth");
  eval->add_option("--dataset", dataset, "Dataset root")->required();
  eval->add_option("--condition", condition, "Condition the trajectory belongs to")->required();
  eval->add_option("--trajectory", trajectory_path, "timestamp tx ty tz qx qy qz qw per line")->required();
  eval->add_option("--output", output, "Report directory")->required();

  std::string per_frame_path;
  auto* plot = app.add_subcommand("export-plot-data", "Error-versus-distance curves from a per-frame report");
  plot->add_option("--per-frame", per_frame_path, "per_frame.csv")->required();
  plot->add_option("--output", output, "CSV file to write")->required();

  std::string rgb_dir, depth_dir;
  double rate = 10.0;
  auto* import = app.add_subcommand("import-frames", "Build a condition from numbered RGB and depth frames");
  import->add_option("--rgb", rgb_dir, "Directory of RGB frames")->required();
  import->add_option("--depth", depth_dir, "Directory of depth frames")->required();
  import->add_option("--dataset", dataset, "Dataset root (must hold calibration.txt and groundtruth.txt)")->required();
  import->add_option("--condition", condition, "Condition to create")->required();
  import->add_option("--rate", rate, "Frame rate in Hz")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUserError;
  }

  try {
    if (vo->parsed()) {
      const PipelineConfig cfg = load_config(config_path);
      const DatasetLayout layout = open_dataset(dataset);
      const VoResult run = run_vo(layout, condition, resolve_transform(transform, layout, condition), cfg);
      write_outputs(run, output);
      if (!map_dir.empty()) save_map(run.map, map_dir);
      std::printf("keyframes: %zu\n", run.map.size());
      print_summary(run.report);
    } else if (reloc->parsed()) {
      const PipelineConfig cfg = load_config(config_path);
      const DatasetLayout layout = open_dataset(dataset);
      const KeyframeMap map = load_map(map_dir, cfg.tracker);
      Pose initial;
      if (initial_pose == "gt") {
        initial = ground_truth_for(layout, read_associations(layout, condition)).front();
      } else {
        initial = parse_pose(initial_pose);
      }
      const RunResult run = run_relocalization(layout, condition, map, initial,
                                               resolve_transform(transform, layout, condition), cfg);
      write_outputs(run, output);
      print_summary(run.report);
    } else if (make_affine->parsed()) {
      const DatasetLayout layout = open_dataset(dataset);
      generate_affine_conditions(layout, source, parse_affine_list(affine_items));
    } else if (render->parsed()) {
      const SceneSpec spec = desk_scene(frames);
      for (const std::string& name : split(render_conditions, ',')) {
        write_rendered_condition(output, name, render_sequence(spec, desk_condition(name)), spec.intrinsics);
        std::printf("rendered %s\n", name.c_str());
      }
    } else if (eval->parsed()) {
      const DatasetLayout layout = open_dataset(dataset);
      const std::vector<FrameEntry> entries = read_associations(layout, condition);
      const std::vector<Pose> gt = ground_truth_for(layout, entries);
      std::vector<StampedPose> gt_stamped;
      for (size_t i = 0; i < gt.size(); ++i) gt_stamped.push_back({entries[i].timestamp, gt[i]});
      RunResult run;
      run.trajectory = read_trajectory(trajectory_path);
      run.tracked.assign(run.trajectory.size(), true);
      run.report = evaluate_run(run, gt_stamped);
      run.report.dataset = layout.root.filename().string();
      run.report.condition = condition;
      run.report.transform = "external-trajectory";
      write_outputs(run, output);
      print_summary(run.report);
    } else if (plot->parsed()) {
      export_plot_data(read_per_frame_csv(per_frame_path), output);
    } else if (import->parsed()) {
      import_numbered_frames(rgb_dir, depth_dir, dataset, condition, rate);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return is_user_error(e.code()) ? kExitUserError : kExitInternalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternalError;
  }
  return 0;
}
