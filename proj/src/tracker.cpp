#include "dvl/tracker.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "dvl/error.hpp"

namespace dvl {

namespace {

constexpr double kDampingFactor = 1e-6;
constexpr double kMaxCondition = 1e12;
constexpr int kMaxStepHalvings = 4;

double sample_field(const std::vector<double>& field, int width, int height, double x, double y) {
  int x0 = std::min(static_cast<int>(x), width - 2);
  int y0 = std::min(static_cast<int>(y), height - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double* r0 = field.data() + static_cast<size_t>(y0) * width + x0;
  const double* r1 = r0 + width;
  const double top = r0[0] + fx * (r0[1] - r0[0]);
  const double bottom = r1[0] + fx * (r1[1] - r1[0]);
  return top + fy * (bottom - top);
}

struct Evaluation {
  std::vector<Residual> residuals;
  double mean_cost = 0.0;
  double inlier_ratio = 0.0;
};

Evaluation evaluate(const Keyframe& kf, int level, const ImageBuffer& img, const Pose& pose, const TrackerConfig& cfg,
                    const TrackOptions& options, const GradientField* grad) {
  Evaluation ev;
  ev.residuals = compute_residuals(kf, level, img, pose, cfg, options, grad);
  const double k = cfg.huber_threshold_normalized();
  double total = 0.0;
  size_t inliers = 0;
  for (const Residual& r : ev.residuals) {
    const double n = r.value / std::sqrt(r.variance);
    total += huber_cost(n, k);
    if (std::abs(n) <= cfg.inlier_threshold) ++inliers;
  }
  ev.mean_cost = total / static_cast<double>(ev.residuals.size());
  ev.inlier_ratio = static_cast<double>(inliers) / static_cast<double>(ev.residuals.size());
  return ev;
}

}  // namespace

WarpResult warp_pixels(const Keyframe& kf, const Pose& pose, int level) {
  const KeyframeLevel& lvl = kf.levels.at(level);
  WarpResult out;
  out.warped.reserve(lvl.points.size());
  for (size_t i = 0; i < lvl.points.size(); ++i) {
    const Vec3 p = act(pose, lvl.points[i]);
    const auto proj = try_project(lvl.intrinsics, p);
    if (!proj) {
      out.dropped.push_back({static_cast<int>(i), DropReason::NonPositiveDepth});
      continue;
    }
    if (!lvl.intrinsics.contains(proj->pixel)) {
      out.dropped.push_back({static_cast<int>(i), DropReason::OutOfBounds});
      continue;
    }
    out.warped.push_back({static_cast<int>(i), proj->pixel, p});
  }
  return out;
}

RowVec6 residual_pose_jacobian(const Vec2& image_gradient, const CameraIntrinsics& k, const Vec3& p) {
  const Eigen::RowVector3d g_proj = -image_gradient.transpose() * projection_jacobian_unchecked(k, p);
  RowVec6 j;
  j.head<3>() = g_proj;
  j.tail<3>() = -g_proj * skew(p);
  return j;
}

double huber_weight(double r, double threshold) {
  const double a = std::abs(r);
  return a <= threshold ? 1.0 : threshold / a;
}

double huber_cost(double r, double threshold) {
  const double a = std::abs(r);
  return a <= threshold ? 0.5 * r * r : threshold * (a - 0.5 * threshold);
}

std::vector<Residual> compute_residuals(const Keyframe& kf, int level, const ImageBuffer& img, const Pose& pose,
                                        const TrackerConfig& cfg, const TrackOptions& options,
                                        const GradientField* grad) {
  const KeyframeLevel& lvl = kf.levels.at(level);
  if (img.width != lvl.image.width || img.height != lvl.image.height || img.channels != 1) {
    throw Error(ErrorCode::DimensionMismatch, "tracking image does not match keyframe level");
  }
  if (options.gradient_source == GradientSource::Warped &&
      (!grad || grad->width != img.width || grad->height != img.height)) {
    throw Error(ErrorCode::DimensionMismatch, "warped-gradient mode needs the tracking gradient field");
  }
  const double var_image = cfg.image_noise_sigma * cfg.image_noise_sigma;
  const WarpResult warp = warp_pixels(kf, pose, level);

  std::vector<Residual> out;
  out.reserve(warp.warped.size());
  for (const WarpedPixel& w : warp.warped) {
    const double sampled = sample_bilinear_unchecked(img, w.pixel.x(), w.pixel.y());
    Vec2 g = lvl.gradients[w.slot];
    if (options.gradient_source == GradientSource::Warped) {
      g = {sample_field(grad->du, grad->width, grad->height, w.pixel.x(), w.pixel.y()),
           sample_field(grad->dv, grad->width, grad->height, w.pixel.x(), w.pixel.y())};
    }
    const Mat23 jp = projection_jacobian_unchecked(lvl.intrinsics, w.point);
    const Eigen::RowVector3d g_proj = -g.transpose() * jp;

    Residual r;
    r.pixel = lvl.selected[w.slot];
    r.value = lvl.intensities[w.slot] - sampled;
    r.jacobian.head<3>() = g_proj;
    r.jacobian.tail<3>() = -g_proj * skew(w.point);
    const double j_depth = g_proj.dot(pose.rotation * lvl.depth_directions[w.slot]);
    const double sigma_d = lvl.depth_sigmas[w.slot];
    r.variance = var_image + j_depth * sigma_d * sigma_d * j_depth;
    out.push_back(r);
  }
  if (out.empty()) throw Error(ErrorCode::NoValidPixels, "all pixels dropped at level " + std::to_string(level));

  if (options.hook) options.hook(options.frame, level, out);
  const double k = cfg.huber_threshold_normalized();
  for (Residual& r : out) r.huber_weight = huber_weight(r.value / std::sqrt(r.variance), k);
  return out;
}

LevelSolution solve_level(const Keyframe& kf, const ImageBuffer& img, const Pose& initial_pose, int level,
                          bool rotation_only, const TrackerConfig& cfg, const TrackOptions& options,
                          const GradientField* grad) {
  LevelSolution sol;
  sol.pose = initial_pose;
  Evaluation current = evaluate(kf, level, img, sol.pose, cfg, options, grad);
  sol.cost_history.push_back(current.mean_cost);

  for (int it = 0; it < cfg.max_iterations_per_level; ++it) {
    Mat6 h = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    for (const Residual& r : current.residuals) {
      const double w = r.huber_weight / r.variance;
      h.noalias() += w * r.jacobian.transpose() * r.jacobian;
      b.noalias() += w * r.jacobian.transpose() * r.value;
    }

    Vec6 delta = Vec6::Zero();
    const auto solve = [&](auto hs, auto bs) {
      using M = decltype(hs);
      const double lambda = kDampingFactor * hs.trace() / static_cast<double>(hs.rows());
      M damped = hs;
      damped.diagonal().array() += lambda;
      Eigen::SelfAdjointEigenSolver<M> eig(damped, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      if (!(lo > 0.0) || !(hi / lo < kMaxCondition)) {
        throw Error(ErrorCode::SingularNormalEquations, "condition estimate exceeds limit at level " +
                                                            std::to_string(level));
      }
      return Eigen::Matrix<double, M::RowsAtCompileTime, 1>(-damped.ldlt().solve(bs));
    };
    if (rotation_only) {
      const Mat3 hr = h.bottomRightCorner<3, 3>();
      const Vec3 br = b.tail<3>();
      delta.tail<3>() = solve(hr, br);
    } else {
      delta = solve(h, b);
    }
    if (!delta.allFinite()) {
      throw Error(ErrorCode::SingularNormalEquations, "non-finite update at level " + std::to_string(level));
    }

    bool accepted = false;
    Evaluation candidate;
    Pose candidate_pose;
    Vec6 step = delta;
    for (int halving = 0; halving <= kMaxStepHalvings; ++halving) {
      candidate_pose = compose(exp_se3(step), sol.pose);
      try {
        candidate = evaluate(kf, level, img, candidate_pose, cfg, options, grad);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoValidPixels) throw;
        step *= 0.5;
        continue;
      }
      if (candidate.mean_cost <= current.mean_cost) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      sol.converged = true;
      break;
    }

    const double rel = current.mean_cost > 0.0 ? (current.mean_cost - candidate.mean_cost) / current.mean_cost : 0.0;
    sol.pose = candidate_pose;
    current = std::move(candidate);
    sol.cost_history.push_back(current.mean_cost);
    ++sol.iterations;
    if (step.norm() < cfg.step_norm_tolerance || rel < cfg.relative_cost_tolerance) {
      sol.converged = true;
      break;
    }
  }
  sol.cost = current.mean_cost;
  sol.inlier_ratio = current.inlier_ratio;
  sol.residual_count = current.residuals.size();
  return sol;
}

TrackResult track_frame(const Keyframe& kf, const ImageBuffer& tracking_image, const Pose& initial_pose,
                        const TrackerConfig& cfg, const TrackOptions& options) {
  TrackResult result;
  result.pose = initial_pose;
  result.status = TrackStatus::Lost;
  const int levels = static_cast<int>(kf.levels.size());
  result.iterations_per_level.assign(levels, 0);

  const ImageBuffer lum = to_luminance(tracking_image);
  if (lum.width != kf.image.width || lum.height != kf.image.height) {
    throw Error(ErrorCode::DimensionMismatch, "tracking image size differs from keyframe");
  }
  if (static_cast<int>(kf.levels.front().selected.size()) < cfg.min_selected_pixels) return result;

  const Pyramid pyr = build_pyramid(lum, kf.intrinsics, levels);
  Pose pose = initial_pose;
  LevelSolution finest;
  try {
    for (int l = levels - 1; l >= 0; --l) {
      GradientField grad;
      if (options.gradient_source == GradientSource::Warped) grad = gradients(pyr.levels[l].image);
      const bool rotation_only = levels > 1 && l == levels - 1;
      LevelSolution sol = solve_level(kf, pyr.levels[l].image, pose, l, rotation_only, cfg, options,
                                      options.gradient_source == GradientSource::Warped ? &grad : nullptr);
      result.iterations_per_level[l] = sol.iterations;
      pose = sol.pose;
      if (l == 0) finest = std::move(sol);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoValidPixels || e.code() == ErrorCode::SingularNormalEquations) return result;
    throw;
  }

  result.final_cost = finest.cost;
  result.inlier_ratio = finest.inlier_ratio;
  const bool lost = !std::isfinite(finest.cost) || finest.inlier_ratio < cfg.min_inlier_ratio ||
                    static_cast<int>(finest.residual_count) < cfg.min_selected_pixels || !pose.rotation.allFinite() ||
                    !pose.translation.allFinite();
  if (lost) return result;
  result.pose = pose;
  result.status = finest.converged ? TrackStatus::Converged : TrackStatus::MaxIterations;
  return result;
}

}  // namespace dvl
