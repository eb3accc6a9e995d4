#include "dvl/keyframe.hpp"

#include "dvl/error.hpp"

namespace dvl {

bool TrackerConfig::valid() const {
  return pyramid_levels >= 1 && huber_delta > 0.0 && max_iterations_per_level > 0 && step_norm_tolerance > 0.0 &&
         relative_cost_tolerance > 0.0 && gradient_threshold > 0.0 && image_noise_sigma > 0.0 &&
         depth_noise_k > 0.0 && min_inlier_ratio > 0.0 && inlier_threshold > 0.0 && min_selected_pixels > 0;
}

Keyframe make_keyframe(int id, const Pose& world_from_keyframe, const ImageBuffer& image, const DepthMap& depth,
                       const CameraIntrinsics& intrinsics, const TrackerConfig& cfg, std::string source_frame,
                       double depth_scale) {
  if (image.width != depth.width || image.height != depth.height || image.width != intrinsics.width ||
      image.height != intrinsics.height) {
    throw Error(ErrorCode::DimensionMismatch, "keyframe image, depth and intrinsics disagree");
  }
  Keyframe kf;
  kf.id = id;
  kf.pose = world_from_keyframe;
  kf.source_frame = std::move(source_frame);
  kf.intrinsics = intrinsics;
  kf.depth_scale = depth_scale;
  kf.image = quantized(to_luminance(image), 16);
  kf.depth = quantized(depth, depth_scale);
  rebuild_levels(kf, cfg);
  return kf;
}

void rebuild_levels(Keyframe& kf, const TrackerConfig& cfg) {
  const Pyramid pyr = build_pyramid(kf.image, kf.intrinsics, cfg.pyramid_levels);
  kf.levels.clear();
  DepthMap depth = kf.depth;
  for (int l = 0; l < cfg.pyramid_levels; ++l) {
    if (l > 0) depth = downsample_depth(depth);
    KeyframeLevel lvl;
    lvl.intrinsics = pyr.levels[l].intrinsics;
    lvl.image = pyr.levels[l].image;
    lvl.depth = depth;
    lvl.gradient = gradients(lvl.image);
    lvl.selected = select_pixels(lvl.gradient, lvl.depth, cfg.gradient_threshold);
    const size_t n = lvl.selected.size();
    lvl.points.reserve(n);
    lvl.depth_directions.reserve(n);
    lvl.intensities.reserve(n);
    lvl.gradients.reserve(n);
    lvl.depth_sigmas.reserve(n);
    for (int idx : lvl.selected) {
      const int x = idx % lvl.image.width;
      const int y = idx / lvl.image.width;
      const double z = lvl.depth.value(x, y);
      const Vec2 px(x, y);
      lvl.points.push_back(backproject_unchecked(lvl.intrinsics, px, z));
      lvl.depth_directions.push_back(backproject_unchecked(lvl.intrinsics, px, 1.0));
      lvl.intensities.push_back(lvl.image.at(x, y));
      lvl.gradients.emplace_back(lvl.gradient.u(x, y), lvl.gradient.v(x, y));
      lvl.depth_sigmas.push_back(cfg.depth_noise_k * z * z);
    }
    kf.levels.push_back(std::move(lvl));
  }
}

}  // namespace dvl
