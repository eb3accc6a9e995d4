#include "dvl/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dvl/config.hpp"
#include "dvl/error.hpp"

namespace fs = std::filesystem;

namespace dvl {

namespace {

constexpr double kTimestampTolerance = 1e-6;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

EvaluationReport evaluate(const std::vector<StampedPose>& estimate, const std::vector<StampedPose>& gt,
                          const std::vector<bool>& tracked) {
  if (estimate.size() != gt.size() || tracked.size() != gt.size()) {
    throw Error(ErrorCode::AlignmentError, "estimate, ground truth and tracked flags differ in length");
  }
  EvaluationReport r;
  r.frames_total = gt.size();
  r.per_frame.resize(gt.size());
  double travelled = 0.0;
  double trans_sum = 0.0;
  double rot_sum = 0.0;
  int prev = -1;
  for (size_t i = 0; i < gt.size(); ++i) {
    if (std::abs(estimate[i].timestamp - gt[i].timestamp) > kTimestampTolerance) {
      throw Error(ErrorCode::AlignmentError, "timestamps differ at frame " + std::to_string(i));
    }
    if (i > 0) travelled += (gt[i].pose.translation - gt[i - 1].pose.translation).norm();
    FrameRecord& rec = r.per_frame[i];
    rec.timestamp = estimate[i].timestamp;
    rec.pose = estimate[i].pose;
    rec.tracked = tracked[i];
    rec.distance_m = travelled;
    if (!tracked[i]) continue;
    ++r.frames_tracked;
    if (prev >= 0) {
      const Pose gt_rel = compose(inverse(gt[prev].pose), gt[i].pose);
      const Pose est_rel = compose(inverse(estimate[prev].pose), estimate[i].pose);
      const Pose err = compose(inverse(gt_rel), est_rel);
      rec.trans_err_m = err.translation.norm();
      rec.rot_err_deg = rotation_angle(err) * kRadToDeg;
      trans_sum += rec.trans_err_m;
      rot_sum += rec.rot_err_deg;
      r.distance_m += gt_rel.translation.norm();
    }
    prev = static_cast<int>(i);
  }
  if (r.frames_tracked < 2) throw Error(ErrorCode::AlignmentError, "fewer than two tracked frames");
  if (!(r.distance_m > 0.0)) throw Error(ErrorCode::AlignmentError, "ground truth does not move");
  r.frames_tracked_pct = 100.0 * static_cast<double>(r.frames_tracked) / static_cast<double>(r.frames_total);
  r.avg_trans_err_pct_dist = 100.0 * trans_sum / r.distance_m;
  r.avg_rot_err_deg_per_m = rot_sum / r.distance_m;
  return r;
}

void export_report(const EvaluationReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());

  std::ofstream summary(dir / "summary.csv", std::ios::trunc);
  summary << "dataset,condition,transform,config_hash,frames_total,frames_tracked_pct,avg_trans_err_pct_dist,"
             "avg_rot_err_deg_per_m,distance_m\n"
          << csv_field(report.dataset) << ',' << csv_field(report.condition) << ',' << csv_field(report.transform)
          << ',' << csv_field(report.config_hash) << ',' << report.frames_total << ','
          << format_report(report.frames_tracked_pct) << ',' << format_report(report.avg_trans_err_pct_dist) << ','
          << format_report(report.avg_rot_err_deg_per_m) << ',' << format_report(report.distance_m) << '\n';
  if (!summary) throw Error(ErrorCode::IoFailure, "cannot write summary.csv");

  std::ofstream frames(dir / "per_frame.csv", std::ios::trunc);
  frames << "timestamp,tx,ty,tz,qx,qy,qz,qw,trans_err_m,rot_err_deg,distance_m,tracked,keyframe_id\n";
  for (const FrameRecord& rec : report.per_frame) {
    const Eigen::Vector4d q = rotation_to_quaternion_xyzw(rec.pose.rotation);
    frames << format_report(rec.timestamp);
    for (int i = 0; i < 3; ++i) frames << ',' << format_report(rec.pose.translation[i]);
    for (int i = 0; i < 4; ++i) frames << ',' << format_report(q[i]);
    frames << ',' << format_report(rec.trans_err_m) << ',' << format_report(rec.rot_err_deg) << ','
           << format_report(rec.distance_m) << ',' << (rec.tracked ? 1 : 0) << ',' << rec.keyframe_id << '\n';
  }
  if (!frames) throw Error(ErrorCode::IoFailure, "cannot write per_frame.csv");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::vector<FrameRecord> read_per_frame_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<FrameRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) throw Error(ErrorCode::DatasetError, "per-frame row has " + std::to_string(f.size()) + " columns");
    try {
      FrameRecord rec;
      rec.timestamp = std::stod(f[0]);
      rec.pose.translation = Vec3(std::stod(f[1]), std::stod(f[2]), std::stod(f[3]));
      rec.pose.rotation =
          quaternion_xyzw_to_rotation(Eigen::Vector4d(std::stod(f[4]), std::stod(f[5]), std::stod(f[6]), std::stod(f[7])));
      rec.trans_err_m = std::stod(f[8]);
      rec.rot_err_deg = std::stod(f[9]);
      rec.distance_m = std::stod(f[10]);
      rec.tracked = std::stoi(f[11]) != 0;
      rec.keyframe_id = std::stoi(f[12]);
      out.push_back(rec);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::DatasetError, "unparseable per-frame row: " + line);
    }
  }
  return out;
}

void export_plot_data(const std::vector<FrameRecord>& records, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << "distance_m,trans_err_m,rot_err_deg,cumulative_trans_err_pct,cumulative_rot_err_deg_per_m\n";
  double trans = 0.0;
  double rot = 0.0;
  for (const FrameRecord& rec : records) {
    if (!rec.tracked) continue;
    trans += rec.trans_err_m;
    rot += rec.rot_err_deg;
    const double d = rec.distance_m;
    out << format_report(d) << ',' << format_report(rec.trans_err_m) << ',' << format_report(rec.rot_err_deg) << ','
        << format_report(d > 0.0 ? 100.0 * trans / d : 0.0) << ',' << format_report(d > 0.0 ? rot / d : 0.0) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace dvl
