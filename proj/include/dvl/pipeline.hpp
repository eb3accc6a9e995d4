#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dvl/appearance.hpp"
#include "dvl/config.hpp"
#include "dvl/dataset.hpp"
#include "dvl/evaluation.hpp"
#include "dvl/keyframe_map.hpp"
#include "dvl/tracker.hpp"

namespace dvl {

struct RunResult {
  std::vector<StampedPose> trajectory;  // world from camera
  std::vector<bool> tracked;
  std::vector<int> keyframe_ids;        // keyframe each frame was tracked against
  std::vector<TrackStatus> statuses;
  EvaluationReport report;
};

struct VoResult : RunResult {
  KeyframeMap map;
};

/// Frame-to-keyframe visual odometry with a constant-velocity prior. The
/// trajectory starts at the first ground-truth pose. Throws DatasetError.
VoResult run_vo(const DatasetLayout& dataset, const std::string& condition, const AppearanceTransform& transform,
                const PipelineConfig& cfg, const TrackOptions& options = {});

/// Tracks every frame against the nearest map keyframe (with hysteresis),
/// never modifying the map. Throws EmptyMap or DatasetError.
RunResult run_relocalization(const DatasetLayout& dataset, const std::string& condition, const KeyframeMap& map,
                             const Pose& initial_pose, const AppearanceTransform& transform, const PipelineConfig& cfg,
                             const TrackOptions& options = {});

/// Evaluates a run; with fewer than two tracked frames the error metrics are
/// NaN instead of raising AlignmentError.
EvaluationReport evaluate_run(const RunResult& run, const std::vector<StampedPose>& ground_truth);

/// Writes clamped gain * I + offset copies of a condition as sibling
/// conditions, recording the parameters in each condition's affine.txt.
void generate_affine_conditions(const DatasetLayout& dataset, const std::string& source_condition,
                                const std::vector<std::pair<std::string, AffineParams>>& conditions);

/// The "Clone", "Light" and "Dark" affine conditions.
std::vector<std::pair<std::string, AffineParams>> standard_affine_conditions();

/// Resolves "affine:meta" against the condition's recorded parameters;
/// everything else goes through parse_transform().
AppearanceTransform resolve_transform(const std::string& text, const DatasetLayout& dataset,
                                      const std::string& condition);

}  // namespace dvl
