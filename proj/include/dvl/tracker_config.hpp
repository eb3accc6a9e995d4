#pragma once

namespace dvl {

/// Knobs of the photometric tracker. Noise parameters feed the per-pixel
/// residual variance; the remaining fields drive the coarse-to-fine solve.
struct TrackerConfig {
  int pyramid_levels = 4;
  /// Huber threshold on normalized residuals e / sqrt(var).
  double huber_delta = 0.1;
  int max_iterations_per_level = 30;
  double step_norm_tolerance = 1e-8;
  double relative_cost_tolerance = 1e-6;
  /// Minimum gradient magnitude (intensity per pixel) for a pixel to be used.
  double gradient_threshold = 0.02;
  double image_noise_sigma = 0.02;
  /// sigma_z = depth_noise_k * z^2, k in 1/m.
  double depth_noise_k = 0.0025;
  double min_inlier_ratio = 0.25;
  /// A residual counts as an inlier for the Lost test when its normalized
  /// magnitude is at most this.
  double inlier_threshold = 1.0;
  int min_selected_pixels = 200;

  double huber_threshold_normalized() const { return huber_delta; }
  bool valid() const;
};

}  // namespace dvl
