#pragma once

#include <functional>
#include <vector>

#include "dvl/keyframe.hpp"

namespace dvl {

using RowVec6 = Eigen::Matrix<double, 1, 6>;

enum class DropReason { NonPositiveDepth, OutOfBounds };

struct WarpedPixel {
  int slot = 0;  // position in KeyframeLevel::selected
  Vec2 pixel;
  Vec3 point;    // in the tracking frame
};

struct DroppedPixel {
  int slot = 0;
  DropReason reason = DropReason::OutOfBounds;
};

struct WarpResult {
  std::vector<WarpedPixel> warped;
  std::vector<DroppedPixel> dropped;
};

/// Maps the selected keyframe pixels of a level into the tracking image.
/// `pose` takes keyframe coordinates to tracking-camera coordinates.
WarpResult warp_pixels(const Keyframe& kf, const Pose& pose, int level = 0);

/// Per-pixel photometric error: keyframe intensity minus the tracking image
/// sampled at the warped location.
struct Residual {
  int pixel = 0;  // row-major index in the level image
  double value = 0.0;
  RowVec6 jacobian = RowVec6::Zero();  // w.r.t. a left twist perturbation
  double variance = 0.0;
  double huber_weight = 1.0;
};

/// Which image gradient enters the residual Jacobian.
enum class GradientSource {
  Keyframe,  // precomputed keyframe gradient (small-motion approximation)
  Warped,    // tracking-image gradient sampled at the warped pixel
};

/// Called with freshly computed residual values, before robust weights are
/// assigned. Used to inject controlled corruption in experiments.
using ResidualHook = std::function<void(int frame, int level, std::vector<Residual>&)>;

struct TrackOptions {
  GradientSource gradient_source = GradientSource::Keyframe;
  ResidualHook hook;
  int frame = 0;  // passed to the hook; the pipelines set the frame index
};

/// Residual Jacobian for one pixel: -grad * d project/d p * [I | -skew(p)].
RowVec6 residual_pose_jacobian(const Vec2& image_gradient, const CameraIntrinsics& k, const Vec3& point_in_tracking);

/// Huber weight min(1, threshold / |r|) on a normalized residual.
double huber_weight(double normalized_residual, double threshold);
double huber_cost(double normalized_residual, double threshold);

/// Residuals at one pyramid level. `tracking_gradient` is required when
/// options.gradient_source is Warped. Throws NoValidPixels.
std::vector<Residual> compute_residuals(const Keyframe& kf, int level, const ImageBuffer& tracking_image,
                                        const Pose& pose, const TrackerConfig& cfg,
                                        const TrackOptions& options = {},
                                        const GradientField* tracking_gradient = nullptr);

struct LevelSolution {
  Pose pose;
  double cost = 0.0;  // mean robust cost over valid residuals
  int iterations = 0;
  bool converged = false;
  double inlier_ratio = 0.0;
  size_t residual_count = 0;
  std::vector<double> cost_history;  // one entry per accepted state
};

/// Huber IRLS Gauss-Newton on one level with left updates pose <- exp(d) pose.
/// Throws NoValidPixels or SingularNormalEquations.
LevelSolution solve_level(const Keyframe& kf, const ImageBuffer& tracking_image, const Pose& initial_pose, int level,
                          bool rotation_only, const TrackerConfig& cfg, const TrackOptions& options = {},
                          const GradientField* tracking_gradient = nullptr);

enum class TrackStatus { Converged, MaxIterations, Lost };

struct TrackResult {
  Pose pose;  // tracking from keyframe
  TrackStatus status = TrackStatus::Lost;
  double final_cost = 0.0;
  double inlier_ratio = 0.0;
  std::vector<int> iterations_per_level;  // finest level first
};

/// Coarse-to-fine tracking of an appearance-transformed luminance (or RGB)
/// image against a keyframe. The coarsest level solves rotation only. On
/// failure the initial pose is returned with status Lost.
TrackResult track_frame(const Keyframe& kf, const ImageBuffer& tracking_image, const Pose& initial_pose,
                        const TrackerConfig& cfg, const TrackOptions& options = {});

}  // namespace dvl
