#include "dvl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dvl/error.hpp"
#include "dvl/png_io.hpp"

namespace fs = std::filesystem;

namespace dvl {

namespace {

struct PreparedFrame {
  ImageBuffer image;  // appearance-transformed luminance
  DepthMap depth;
};

PreparedFrame prepare(const DatasetLayout& dataset, const FrameEntry& entry, const AppearanceTransform& transform,
                      const PipelineConfig& cfg) {
  LoadedFrame raw = load_frame(dataset, entry, cfg.stereo_window, cfg.stereo_max_disparity);
  return {to_luminance(apply(transform, raw.image, entry.name)), std::move(raw.depth)};
}

DatasetLayout with_config(DatasetLayout layout, const PipelineConfig& cfg) {
  if (cfg.depth_scale) layout.calibration.depth_scale = *cfg.depth_scale;
  return layout;
}

bool within_prior(const Pose& estimate, const Pose& prior, const PipelineConfig& cfg) {
  return (estimate.translation - prior.translation).norm() < cfg.max_prior_jump_factor * cfg.keyframes.translation;
}

void finish_report(RunResult& run, const DatasetLayout& dataset, const std::vector<Pose>& gt,
                   const std::string& condition, const AppearanceTransform& transform, const PipelineConfig& cfg) {
  std::vector<StampedPose> gt_stamped;
  for (size_t i = 0; i < gt.size(); ++i) gt_stamped.push_back({run.trajectory[i].timestamp, gt[i]});
  run.report = evaluate_run(run, gt_stamped);
  run.report.dataset = dataset.root.filename().string();
  run.report.condition = condition;
  run.report.transform = describe(transform);
  run.report.config_hash = cfg.hash();
}

}  // namespace

EvaluationReport evaluate_run(const RunResult& run, const std::vector<StampedPose>& ground_truth) {
  const size_t tracked = static_cast<size_t>(std::count(run.tracked.begin(), run.tracked.end(), true));
  EvaluationReport report;
  if (tracked >= 2) {
    report = evaluate(run.trajectory, ground_truth, run.tracked);
  } else {
    if (run.trajectory.size() != ground_truth.size()) {
      throw Error(ErrorCode::AlignmentError, "trajectory and ground truth differ in length");
    }
    report.frames_total = run.trajectory.size();
    report.frames_tracked = tracked;
    report.frames_tracked_pct =
        report.frames_total ? 100.0 * static_cast<double>(tracked) / static_cast<double>(report.frames_total) : 0.0;
    report.avg_trans_err_pct_dist = std::numeric_limits<double>::quiet_NaN();
    report.avg_rot_err_deg_per_m = std::numeric_limits<double>::quiet_NaN();
    double travelled = 0.0;
    for (size_t i = 0; i < run.trajectory.size(); ++i) {
      if (i > 0) travelled += (ground_truth[i].pose.translation - ground_truth[i - 1].pose.translation).norm();
      FrameRecord rec;
      rec.timestamp = run.trajectory[i].timestamp;
      rec.pose = run.trajectory[i].pose;
      rec.tracked = run.tracked[i];
      rec.distance_m = travelled;
      report.per_frame.push_back(rec);
    }
  }
  for (size_t i = 0; i < report.per_frame.size() && i < run.keyframe_ids.size(); ++i) {
    report.per_frame[i].keyframe_id = run.keyframe_ids[i];
  }
  return report;
}

VoResult run_vo(const DatasetLayout& dataset_in, const std::string& condition, const AppearanceTransform& transform,
                const PipelineConfig& cfg, const TrackOptions& options) {
  const DatasetLayout dataset = with_config(dataset_in, cfg);
  const std::vector<FrameEntry> entries = read_associations(dataset, condition);
  const std::vector<Pose> gt = ground_truth_for(dataset, entries);
  const CameraIntrinsics& k = dataset.calibration.intrinsics;

  VoResult run;
  run.map.intrinsics = k;
  run.map.thresholds = cfg.keyframes;
  run.map.depth_scale = dataset.calibration.depth_scale;

  Pose previous = gt.front();
  Pose velocity = Pose::identity();
  for (size_t i = 0; i < entries.size(); ++i) {
    PreparedFrame frame = prepare(dataset, entries[i], transform, cfg);
    if (i == 0) {
      run.map.append(make_keyframe(0, previous, frame.image, frame.depth, k, cfg.tracker, entries[i].name,
                                   dataset.calibration.depth_scale));
      run.trajectory.push_back({entries[i].timestamp, previous});
      run.tracked.push_back(true);
      run.keyframe_ids.push_back(0);
      run.statuses.push_back(TrackStatus::Converged);
      continue;
    }
    const Keyframe& kf = run.map.keyframes.back();
    const Pose prior = compose(previous, velocity);
    TrackOptions frame_options = options;
    frame_options.frame = static_cast<int>(i);
    const TrackResult result =
        track_frame(kf, frame.image, compose(inverse(prior), kf.pose), cfg.tracker, frame_options);

    Pose pose = prior;
    bool tracked = false;
    if (result.status != TrackStatus::Lost) {
      pose = compose(kf.pose, inverse(result.pose));
      tracked = within_prior(pose, prior, cfg);
      if (!tracked) pose = prior;
    }
    run.trajectory.push_back({entries[i].timestamp, pose});
    run.tracked.push_back(tracked);
    run.keyframe_ids.push_back(kf.id);
    run.statuses.push_back(result.status);

    if (tracked) {
      velocity = compose(inverse(previous), pose);
      if (should_create_keyframe(kf.pose, pose, cfg.keyframes)) {
        run.map.append(make_keyframe(run.map.next_id(), pose, frame.image, frame.depth, k, cfg.tracker,
                                     entries[i].name, dataset.calibration.depth_scale));
      }
    }
    previous = pose;
  }
  finish_report(run, dataset, gt, condition, transform, cfg);
  return run;
}

RunResult run_relocalization(const DatasetLayout& dataset_in, const std::string& condition, const KeyframeMap& map,
                             const Pose& initial_pose, const AppearanceTransform& transform,
                             const PipelineConfig& cfg, const TrackOptions& options) {
  if (map.empty()) throw Error(ErrorCode::EmptyMap, "relocalization needs a keyframe map");
  const DatasetLayout dataset = with_config(dataset_in, cfg);
  const std::vector<FrameEntry> entries = read_associations(dataset, condition);
  const std::vector<Pose> gt = ground_truth_for(dataset, entries);
  const double margin = cfg.reloc_hysteresis_fraction * cfg.keyframes.translation;

  RunResult run;
  Pose previous = initial_pose;
  Pose velocity = Pose::identity();
  int active = -1;
  for (size_t i = 0; i < entries.size(); ++i) {
    PreparedFrame frame = prepare(dataset, entries[i], transform, cfg);
    const Pose prior = i == 0 ? initial_pose : compose(previous, velocity);
    const Keyframe& kf = select_keyframe(map, prior, active, margin);
    active = kf.id;
    TrackOptions frame_options = options;
    frame_options.frame = static_cast<int>(i);
    const TrackResult result =
        track_frame(kf, frame.image, compose(inverse(prior), kf.pose), cfg.tracker, frame_options);

    Pose pose = prior;
    bool tracked = false;
    if (result.status != TrackStatus::Lost) {
      pose = compose(kf.pose, inverse(result.pose));
      tracked = within_prior(pose, prior, cfg);
      if (!tracked) pose = prior;
    }
    if (tracked && i > 0) velocity = compose(inverse(previous), pose);
    run.trajectory.push_back({entries[i].timestamp, pose});
    run.tracked.push_back(tracked);
    run.keyframe_ids.push_back(kf.id);
    run.statuses.push_back(result.status);
    previous = pose;
  }
  finish_report(run, dataset, gt, condition, transform, cfg);
  return run;
}

void generate_affine_conditions(const DatasetLayout& dataset, const std::string& source_condition,
                                const std::vector<std::pair<std::string, AffineParams>>& conditions) {
  const std::vector<FrameEntry> entries = read_associations(dataset, source_condition);
  const fs::path src_dir = dataset.condition_dir(source_condition);
  for (const auto& [name, params] : conditions) {
    if (name == source_condition) throw Error(ErrorCode::DatasetError, "target condition equals the source");
    const fs::path dst = dataset.condition_dir(name);
    std::vector<std::string> names;
    std::vector<AffineParams> recorded;
    for (const FrameEntry& e : entries) {
      const fs::path rel_image = fs::relative(e.image, src_dir);
      const fs::path rel_second = fs::relative(e.second, src_dir);
      std::error_code ec;
      fs::create_directories((dst / rel_image).parent_path(), ec);
      fs::create_directories((dst / rel_second).parent_path(), ec);
      if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dst.string());

      const RawImage raw = read_png_raw(e.image);
      save_image_png(dst / rel_image, apply_affine_change(load_image_png(e.image), params), raw.bit_depth);
      if (e.stereo) {
        const RawImage raw_right = read_png_raw(e.second);
        save_image_png(dst / rel_second, apply_affine_change(load_image_png(e.second), params), raw_right.bit_depth);
      } else {
        fs::copy_file(e.second, dst / rel_second, fs::copy_options::overwrite_existing, ec);
        if (ec) throw Error(ErrorCode::IoFailure, "cannot copy " + e.second.string() + ": " + ec.message());
      }
      names.push_back(e.name);
      recorded.push_back(params);
    }
    fs::copy_file(src_dir / "associations.txt", dst / "associations.txt", fs::copy_options::overwrite_existing);
    write_affine_metadata(dst, names, recorded);
  }
}

std::vector<std::pair<std::string, AffineParams>> standard_affine_conditions() {
  return {{"clone", {1.0, 0.0}}, {"light", {1.5, 0.1}}, {"dark", {0.8, -0.2}}};
}

AppearanceTransform resolve_transform(const std::string& text, const DatasetLayout& dataset,
                                      const std::string& condition) {
  if (text == "affine:meta") {
    AffineCorrection t;
    t.per_frame = read_affine_metadata(dataset, condition);
    if (t.per_frame.empty()) {
      throw Error(ErrorCode::DatasetError, "condition '" + condition + "' has no recorded affine parameters");
    }
    return t;
  }
  return parse_transform(text);
}

}  // namespace dvl
