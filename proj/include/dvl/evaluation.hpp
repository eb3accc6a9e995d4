#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dvl/dataset.hpp"

namespace dvl {

struct FrameRecord {
  double timestamp = 0.0;
  Pose pose;                   // estimated, world from camera
  double trans_err_m = 0.0;    // error of the segment ending at this frame
  double rot_err_deg = 0.0;
  double distance_m = 0.0;     // ground-truth distance travelled so far
  bool tracked = false;
  int keyframe_id = -1;
};

struct EvaluationReport {
  std::string dataset;
  std::string condition;
  std::string transform;
  std::string config_hash;
  size_t frames_total = 0;
  size_t frames_tracked = 0;
  double frames_tracked_pct = 0.0;
  double avg_trans_err_pct_dist = 0.0;
  double avg_rot_err_deg_per_m = 0.0;
  double distance_m = 0.0;  // ground-truth length of the evaluated segments
  std::vector<FrameRecord> per_frame;
};

/// Relative pose error between consecutive tracked frames. Translational
/// error is the summed norm of the segment error translations over the summed
/// ground-truth segment lengths (x100); rotational error is the summed
/// segment error angle in degrees over the same length. Untracked frames
/// only lower frames_tracked_pct. Throws AlignmentError.
EvaluationReport evaluate(const std::vector<StampedPose>& estimate, const std::vector<StampedPose>& ground_truth,
                          const std::vector<bool>& tracked);

inline constexpr int kSummaryColumns = 9;

/// summary.csv (one header, one row) and per_frame.csv, 12 significant digits.
void export_report(const EvaluationReport& report, const std::filesystem::path& dir);

std::vector<FrameRecord> read_per_frame_csv(const std::filesystem::path& path);

/// Error-versus-distance curves: distance_m, trans_err_m, rot_err_deg,
/// cumulative_trans_err_pct, cumulative_rot_err_deg_per_m (tracked frames).
void export_plot_data(const std::vector<FrameRecord>& records, const std::filesystem::path& path);

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dvl
