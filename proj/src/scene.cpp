#include "dvl/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Geometry>

#include "dvl/error.hpp"

namespace dvl {

namespace {

constexpr double kMinValidDepthFraction = 0.8;
constexpr double kRayEpsilon = 1e-9;

std::uint32_t hash32(std::int32_t x, std::int32_t y, std::uint32_t seed) {
  std::uint32_t h = seed * 0x9e3779b9u;
  h ^= static_cast<std::uint32_t>(x) * 0x85ebca6bu;
  h = (h << 13) | (h >> 19);
  h ^= static_cast<std::uint32_t>(y) * 0xc2b2ae35u;
  h ^= h >> 16;
  h *= 0x7feb352du;
  h ^= h >> 15;
  h *= 0x846ca68bu;
  h ^= h >> 16;
  return h;
}

double lattice(std::int32_t x, std::int32_t y, std::uint32_t seed) {
  return static_cast<double>(hash32(x, y, seed)) / 4294967295.0;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

struct Hit {
  double lambda = std::numeric_limits<double>::infinity();
  Vec3 normal = Vec3::Zero();
  double tex_u = 0.0;
  double tex_v = 0.0;
  const SurfaceMaterial* material = nullptr;
};

void intersect_plane(const TexturedPlane& plane, const Vec3& origin, const Vec3& dir, Hit& hit) {
  const Vec3 n = plane.axis_u.cross(plane.axis_v);
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-15) return;
  const double lambda = n.dot(plane.origin - origin) / denom;
  if (!(lambda > kRayEpsilon) || lambda >= hit.lambda) return;
  const Vec3 rel = origin + lambda * dir - plane.origin;
  const double s = rel.dot(plane.axis_u) / plane.axis_u.squaredNorm();
  const double t = rel.dot(plane.axis_v) / plane.axis_v.squaredNorm();
  if (s < 0.0 || t < 0.0 || s > plane.extent_u || t > plane.extent_v) return;
  hit.lambda = lambda;
  hit.normal = n.normalized();
  hit.tex_u = s * plane.axis_u.norm();
  hit.tex_v = t * plane.axis_v.norm();
  hit.material = &plane.material;
}

void intersect_box(const TexturedBox& box, const Vec3& origin, const Vec3& dir, Hit& hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis_near = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box.min_corner[a] || origin[a] > box.max_corner[a]) return;
      continue;
    }
    double t0 = (box.min_corner[a] - origin[a]) / dir[a];
    double t1 = (box.max_corner[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis_near = a;
    }
    t_far = std::min(t_far, t1);
  }
  if (axis_near < 0 || t_near > t_far || !(t_near > kRayEpsilon) || t_near >= hit.lambda) return;
  hit.lambda = t_near;
  hit.normal = Vec3::Zero();
  hit.normal[axis_near] = dir[axis_near] > 0.0 ? -1.0 : 1.0;
  const Vec3 p = origin + t_near * dir;
  const int a1 = (axis_near + 1) % 3;
  const int a2 = (axis_near + 2) % 3;
  hit.tex_u = p[a1] - box.min_corner[a1] + 7.0 * axis_near;
  hit.tex_v = p[a2] - box.min_corner[a2];
  hit.material = &box.material;
}

Hit cast(const SceneSpec& spec, const Vec3& origin, const Vec3& dir) {
  Hit hit;
  for (const TexturedPlane& p : spec.planes) intersect_plane(p, origin, dir, hit);
  for (const TexturedBox& b : spec.boxes) intersect_box(b, origin, dir, hit);
  return hit;
}

double texture(const SurfaceMaterial& m, double u, double v) {
  const double f = m.feature_size;
  return 0.65 * value_noise(u / f, v / f, m.seed) + 0.35 * value_noise(2.0 * u / f + 17.3, 2.0 * v / f + 5.1, m.seed + 101);
}

const Pose& frame_pose(const SceneSpec& spec, int frame) {
  if (frame < 0 || frame >= static_cast<int>(spec.trajectory.size())) {
    throw Error(ErrorCode::DegenerateScene, "frame " + std::to_string(frame) + " outside trajectory");
  }
  return spec.trajectory[frame];
}

std::vector<PointLight> lights_for(const SceneSpec& spec, const IlluminationCondition& condition, int frame) {
  std::vector<PointLight> lights = spec.lights;
  if (const auto* local = std::get_if<LocalLight>(&condition)) {
    const double phase = 2.0 * std::numbers::pi * frame / local->period_frames;
    lights.push_back({local->center + std::sin(phase) * local->amplitude, local->intensity});
  } else if (const auto* flash = std::get_if<Flashlight>(&condition)) {
    lights.push_back({frame_pose(spec, frame).translation, flash->intensity});
  }
  return lights;
}

}  // namespace

double value_noise(double x, double y, std::uint32_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int32_t>(fx);
  const auto iy = static_cast<std::int32_t>(fy);
  const double tx = fade(x - fx);
  const double ty = fade(y - fy);
  const double a = lattice(ix, iy, seed);
  const double b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed);
  const double d = lattice(ix + 1, iy + 1, seed);
  const double top = a + tx * (b - a);
  const double bottom = c + tx * (d - c);
  return top + ty * (bottom - top);
}

AffineParams GlobalAffine::at(int frame) const {
  if (period_frames <= 0.0) return base;
  const double s = std::sin(2.0 * std::numbers::pi * frame / period_frames);
  return {base.gain + gain_amplitude * s, base.offset + offset_amplitude * s};
}

std::string condition_name(const IlluminationCondition& condition) {
  switch (condition.index()) {
    case 0: return "static";
    case 1: return "global";
    case 2: return "local";
    default: return "flashlight";
  }
}

ImageBuffer render_radiance(const SceneSpec& spec, const IlluminationCondition& condition, int frame) {
  const Pose& pose = frame_pose(spec, frame);
  const CameraIntrinsics& k = spec.intrinsics;
  const std::vector<PointLight> lights = lights_for(spec, condition, frame);
  const int ss = std::max(1, spec.supersample);
  ImageBuffer out(k.width, k.height, 3);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      Vec3 acc = Vec3::Zero();
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double px = x + (sx + 0.5) / ss - 0.5;
          const double py = y + (sy + 0.5) / ss - 0.5;
          const Vec3 ray_cam((px - k.cu) / k.fu, (py - k.cv) / k.fv, 1.0);
          const Vec3 dir = pose.rotation * ray_cam;
          const Hit hit = cast(spec, pose.translation, dir);
          if (!hit.material) continue;
          const Vec3 point = pose.translation + hit.lambda * dir;
          Vec3 n = hit.normal;
          if (n.dot(dir) > 0.0) n = -n;
          double shading = spec.ambient;
          for (const PointLight& light : lights) {
            const Vec3 to_light = light.position - point;
            const double r2 = to_light.squaredNorm();
            if (r2 < 1e-12) continue;
            shading += light.intensity * std::max(0.0, n.dot(to_light) / std::sqrt(r2)) / r2;
          }
          const SurfaceMaterial& m = *hit.material;
          const double albedo = std::clamp(m.base + m.contrast * (texture(m, hit.tex_u, hit.tex_v) - 0.5), 0.0, 1.0);
          acc += (albedo * shading) * m.tint;
        }
      }
      acc /= static_cast<double>(ss * ss);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = acc[c];
    }
  }
  return out;
}

DepthMap render_depth(const SceneSpec& spec, int frame) {
  const Pose& pose = frame_pose(spec, frame);
  const CameraIntrinsics& k = spec.intrinsics;
  DepthMap depth(k.width, k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3 ray_cam((x - k.cu) / k.fu, (y - k.cv) / k.fv, 1.0);
      const Hit hit = cast(spec, pose.translation, pose.rotation * ray_cam);
      // The camera-frame ray has unit z, so the ray parameter is the depth.
      if (hit.material && std::isfinite(hit.lambda)) depth.set(x, y, hit.lambda);
    }
  }
  return depth;
}

RenderedSequence render_sequence(const SceneSpec& spec, const IlluminationCondition& condition) {
  if (!spec.intrinsics.valid()) throw Error(ErrorCode::DegenerateScene, "invalid intrinsics");
  RenderedSequence seq;
  const auto* global = std::get_if<GlobalAffine>(&condition);
  for (int f = 0; f < static_cast<int>(spec.trajectory.size()); ++f) {
    DepthMap depth = render_depth(spec, f);
    if (depth.valid_count() < kMinValidDepthFraction * depth.data.size()) {
      throw Error(ErrorCode::DegenerateScene, "frame " + std::to_string(f) + " has too little valid depth");
    }
    ImageBuffer img = render_radiance(spec, condition, f);
    const AffineParams affine = global ? global->at(f) : AffineParams{};
    for (double& v : img.data) v = std::clamp(affine.gain * v + affine.offset, 0.0, 1.0);

    char name[32];
    std::snprintf(name, sizeof(name), "%06d", f);
    seq.frame_names.emplace_back(name);
    seq.timestamps.push_back(f / spec.frame_rate);
    seq.images.push_back(std::move(img));
    seq.depths.push_back(std::move(depth));
    seq.poses.push_back(spec.trajectory[f]);
    if (global) seq.affine.push_back(affine);
  }
  return seq;
}

std::vector<TrainingPair> make_training_pairs(const RenderedSequence& canonical,
                                              const std::vector<std::pair<std::string, RenderedSequence>>& others) {
  std::vector<TrainingPair> pairs;
  for (const auto& [name, seq] : others) {
    if (seq.poses.size() != canonical.poses.size()) {
      throw Error(ErrorCode::TrajectoryMismatch, "condition '" + name + "' has a different frame count");
    }
    for (size_t i = 0; i < seq.poses.size(); ++i) {
      const Pose& a = seq.poses[i];
      const Pose& b = canonical.poses[i];
      if (a.rotation != b.rotation || a.translation != b.translation) {
        throw Error(ErrorCode::TrajectoryMismatch, "condition '" + name + "' differs at frame " + std::to_string(i));
      }
      pairs.push_back({seq.frame_names[i], name, seq.images[i], canonical.images[i], a, b});
    }
  }
  return pairs;
}

std::vector<TrainingPair> make_training_pairs(const SceneSpec& spec, const IlluminationCondition& canonical,
                                              const std::vector<IlluminationCondition>& others) {
  const RenderedSequence target = render_sequence(spec, canonical);
  std::vector<std::pair<std::string, RenderedSequence>> inputs;
  for (const IlluminationCondition& c : others) inputs.emplace_back(condition_name(c), render_sequence(spec, c));
  return make_training_pairs(target, inputs);
}

SceneSpec desk_scene(int frames, int width, int height) {
  SceneSpec s;
  s.intrinsics.width = width;
  s.intrinsics.height = height;
  s.intrinsics.fu = 200.0 * width / 256.0;
  s.intrinsics.fv = s.intrinsics.fu;
  s.intrinsics.cu = 0.5 * width - 0.5;
  s.intrinsics.cv = 0.5 * height - 0.5;

  // Room: x in [-2.5, 2.5], y in [-1.4, 1.2] (floor at +1.2), z in [-1.5, 6.5].
  const double x0 = -2.5, x1 = 2.5, y0 = -1.4, y1 = 1.2, z0 = -1.5, z1 = 6.5;
  const auto mat = [](std::uint32_t seed, Vec3 tint, double feature) {
    SurfaceMaterial m;
    m.seed = seed;
    m.tint = tint;
    m.feature_size = feature;
    return m;
  };
  s.planes.push_back({{x0, y0, z1}, Vec3::UnitX(), Vec3::UnitY(), x1 - x0, y1 - y0, mat(11, {1.0, 0.95, 0.9}, 0.12)});
  s.planes.push_back({{x0, y0, z0}, Vec3::UnitX(), Vec3::UnitY(), x1 - x0, y1 - y0, mat(12, {0.9, 0.95, 1.0}, 0.12)});
  s.planes.push_back({{x0, y0, z0}, Vec3::UnitZ(), Vec3::UnitY(), z1 - z0, y1 - y0, mat(13, {0.95, 1.0, 0.9}, 0.10)});
  s.planes.push_back({{x1, y0, z0}, Vec3::UnitZ(), Vec3::UnitY(), z1 - z0, y1 - y0, mat(14, {1.0, 0.9, 0.95}, 0.10)});
  s.planes.push_back({{x0, y1, z0}, Vec3::UnitX(), Vec3::UnitZ(), x1 - x0, z1 - z0, mat(15, {0.85, 0.8, 0.75}, 0.08)});
  s.planes.push_back({{x0, y0, z0}, Vec3::UnitX(), Vec3::UnitZ(), x1 - x0, z1 - z0, mat(16, {0.9, 0.9, 0.9}, 0.15)});
  s.boxes.push_back({{-1.6, 0.3, 3.0}, {-0.8, 1.2, 3.8}, mat(21, {1.0, 0.85, 0.7}, 0.06)});
  s.boxes.push_back({{0.7, -0.1, 3.6}, {1.5, 1.2, 4.4}, mat(22, {0.7, 0.85, 1.0}, 0.06)});

  s.ambient = 0.4;
  s.lights.push_back({{0.0, -0.5, 3.0}, 0.35});

  const double n = std::max(frames, 1);
  for (int f = 0; f < frames; ++f) {
    const double phase = 2.0 * std::numbers::pi * f / n;
    Twist xi = Twist::Zero();
    xi.tail<3>() = Vec3(0.03 * std::sin(2.0 * phase), 0.14 * std::sin(phase), 0.0);
    Pose pose;
    pose.rotation = exp_se3(xi).rotation;
    pose.translation = Vec3(0.15 * std::sin(phase), 0.03 * std::sin(2.0 * phase), 0.02 * f);
    s.trajectory.push_back(pose);
  }
  return s;
}

GlobalAffine desk_global_schedule() {
  GlobalAffine g;
  g.base = {1.0, 0.0};
  g.gain_amplitude = 0.15;
  g.offset_amplitude = 0.03;
  g.period_frames = 30.0;
  return g;
}

IlluminationCondition desk_condition(const std::string& name) {
  if (name == "static") return StaticIllumination{};
  if (name == "global") return desk_global_schedule();
  if (name == "local") return LocalLight{{0.0, -0.8, 2.5}, {1.5, 0.0, 0.5}, 50.0, 0.3};
  if (name == "flashlight") return Flashlight{0.25};
  throw Error(ErrorCode::ConfigError, "unknown illumination condition '" + name + "'");
}

}  // namespace dvl
