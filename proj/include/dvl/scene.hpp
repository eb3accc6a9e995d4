#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dvl/appearance.hpp"
#include "dvl/image.hpp"
#include "dvl/se3.hpp"

namespace dvl {

/// Procedural albedo: smoothed value noise with two octaves, the finer one at
/// half of `feature_size` (meters). Per-channel albedo = tint * (base +
/// contrast * (noise - 0.5)).
struct SurfaceMaterial {
  Vec3 tint = Vec3::Ones();
  double base = 0.55;
  double contrast = 0.7;
  double feature_size = 0.12;
  std::uint32_t seed = 1;
};

/// Rectangle origin + s * axis_u + t * axis_v, s in [0, extent_u], t in [0, extent_v].
struct TexturedPlane {
  Vec3 origin = Vec3::Zero();
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  double extent_u = 1.0;
  double extent_v = 1.0;
  SurfaceMaterial material;
};

/// Axis-aligned box.
struct TexturedBox {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Ones();
  SurfaceMaterial material;
};

struct PointLight {
  Vec3 position = Vec3::Zero();
  double intensity = 1.0;
};

/// World frame is y-down, z-forward like the camera. Trajectory poses are
/// world-from-camera.
struct SceneSpec {
  std::vector<TexturedPlane> planes;
  std::vector<TexturedBox> boxes;
  double ambient = 0.4;
  std::vector<PointLight> lights;
  std::vector<Pose> trajectory;
  CameraIntrinsics intrinsics;
  int supersample = 2;  // samples per pixel side for shading
  double frame_rate = 10.0;
};

/// The scene's own ambient and static lights.
struct StaticIllumination {};

/// I' = gain(t) * I + offset(t), with gain(t) = gain + gain_amplitude *
/// sin(2 pi t / period_frames) and likewise for the offset.
struct GlobalAffine {
  AffineParams base;
  double gain_amplitude = 0.0;
  double offset_amplitude = 0.0;
  double period_frames = 0.0;

  AffineParams at(int frame) const;
};

/// An extra point light moving as center + amplitude * sin(2 pi t / period_frames).
struct LocalLight {
  Vec3 center = Vec3::Zero();
  Vec3 amplitude = Vec3::Zero();
  double period_frames = 50.0;
  double intensity = 1.0;
};

/// A point light at the camera centre.
struct Flashlight {
  double intensity = 1.0;
};

using IlluminationCondition = std::variant<StaticIllumination, GlobalAffine, LocalLight, Flashlight>;

std::string condition_name(const IlluminationCondition& condition);

struct RenderedSequence {
  std::vector<std::string> frame_names;
  std::vector<double> timestamps;
  std::vector<ImageBuffer> images;  // RGB
  std::vector<DepthMap> depths;
  std::vector<Pose> poses;  // world from camera
  /// Set for GlobalAffine renders: parameters applied to each frame.
  std::vector<AffineParams> affine;
};

/// Unclipped linear shading of one frame, before any global affine change.
ImageBuffer render_radiance(const SceneSpec& spec, const IlluminationCondition& condition, int frame);
/// Depth of the ray through each pixel centre; invalid where nothing is hit.
DepthMap render_depth(const SceneSpec& spec, int frame);

/// Throws DegenerateScene when a frame has finite depth on less than 80% of
/// its pixels.
RenderedSequence render_sequence(const SceneSpec& spec, const IlluminationCondition& condition);

struct TrainingPair {
  std::string frame_name;
  std::string condition;
  ImageBuffer input;
  ImageBuffer target;
  Pose input_pose;
  Pose target_pose;
};

/// Pairs every frame of each non-canonical render with the canonical frame at
/// the same index. Throws TrajectoryMismatch when poses differ.
std::vector<TrainingPair> make_training_pairs(const RenderedSequence& canonical,
                                              const std::vector<std::pair<std::string, RenderedSequence>>& others);
std::vector<TrainingPair> make_training_pairs(const SceneSpec& spec, const IlluminationCondition& canonical,
                                              const std::vector<IlluminationCondition>& others);

/// Smoothed value noise in [0, 1]; exposed for tests.
double value_noise(double x, double y, std::uint32_t seed);

/// Textured room with two boxes and a ceiling light; the camera moves forward
/// while yawing.
SceneSpec desk_scene(int frames = 100, int width = 256, int height = 192);

/// Time-varying global illumination used by the VO benchmark.
GlobalAffine desk_global_schedule();

/// "static", "global", "local" or "flashlight" for the desk scene. Throws
/// ConfigError.
IlluminationCondition desk_condition(const std::string& name);

}  // namespace dvl
