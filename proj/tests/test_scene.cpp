#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dvl/error.hpp"
#include "dvl/scene.hpp"
#include "support.hpp"

using namespace dvl;

namespace {

SceneSpec small_desk(int frames = 3) {
  SceneSpec s = desk_scene(frames, 64, 48);
  s.supersample = 1;
  return s;
}

CameraIntrinsics odd_camera() {
  CameraIntrinsics k;
  k.fu = k.fv = 60;
  k.cu = 32;
  k.cv = 24;
  k.width = 65;
  k.height = 49;
  return k;
}

// A single large plane z = d facing the camera, flat albedo.
SceneSpec wall_scene(double d, const std::vector<double>& camera_z) {
  SceneSpec s;
  TexturedPlane wall;
  wall.origin = Vec3(-50, -50, d);
  wall.extent_u = wall.extent_v = 100;
  wall.material.contrast = 0.0;
  wall.material.base = 0.6;
  s.planes.push_back(wall);
  s.ambient = 0.0;
  s.intrinsics = odd_camera();
  s.supersample = 1;
  for (double z : camera_z) {
    Pose p;
    p.translation = Vec3(0, 0, z);
    s.trajectory.push_back(p);
  }
  return s;
}

}  // namespace

TEST(Render, StaticIsDeterministic) {
  const SceneSpec s = small_desk();
  const RenderedSequence a = render_sequence(s, StaticIllumination{});
  const RenderedSequence b = render_sequence(s, StaticIllumination{});
  ASSERT_EQ(a.images.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.images[i], b.images[i]);
    EXPECT_EQ(a.depths[i], b.depths[i]);
  }
  EXPECT_EQ(a.frame_names[1], "000001");
  EXPECT_DOUBLE_EQ(a.timestamps[1], 1.0 / s.frame_rate);
}

TEST(Render, GlobalAffineIsExactlyAffineInStatic) {
  const SceneSpec s = small_desk();
  const RenderedSequence base = render_sequence(s, StaticIllumination{});
  GlobalAffine light;
  light.base = {1.5, 0.1};
  const RenderedSequence lit = render_sequence(s, light);
  ASSERT_EQ(lit.affine.size(), 3u);
  EXPECT_EQ(lit.affine[0], (AffineParams{1.5, 0.1}));
  size_t unclipped = 0;
  for (size_t f = 0; f < 3; ++f) {
    const ImageBuffer radiance = render_radiance(s, StaticIllumination{}, static_cast<int>(f));
    for (size_t i = 0; i < radiance.data.size(); ++i) {
      const double raw = 1.5 * radiance.data[i] + 0.1;
      if (radiance.data[i] <= 0.0 || radiance.data[i] >= 1.0 || raw >= 1.0) continue;
      ++unclipped;
      EXPECT_NEAR(lit.images[f].data[i], 1.5 * base.images[f].data[i] + 0.1, 1e-12);
    }
  }
  EXPECT_GT(unclipped, 1000u);
}

TEST(Render, TimeVaryingGlobalScheduleIsRecorded) {
  const SceneSpec s = small_desk(8);
  const GlobalAffine g = desk_global_schedule();
  const RenderedSequence r = render_sequence(s, g);
  for (int f = 0; f < 8; ++f) EXPECT_EQ(r.affine[f], g.at(f));
  EXPECT_NE(r.affine[0], r.affine[5]);
}

TEST(Render, FlashlightFallsOffWithSquaredDistance) {
  const double d = 3.0, intensity = 2.0;
  const std::vector<double> zs = {0.0, 0.5, 1.0, 1.5};
  const SceneSpec s = wall_scene(d, zs);
  for (size_t f = 0; f < zs.size(); ++f) {
    const ImageBuffer img = render_radiance(s, Flashlight{intensity}, static_cast<int>(f));
    const double dist = d - zs[f];
    EXPECT_NEAR(img.at(32, 24), 0.6 * intensity / (dist * dist), 1e-12);
  }
}

TEST(Render, DepthMatchesRayPlaneIntersection) {
  SceneSpec s;
  TexturedPlane p;
  p.origin = Vec3(-10, -10, 2);
  p.axis_u = Vec3(1, 0, 0.3).normalized();
  p.axis_v = Vec3(0, 1, -0.2).normalized();
  p.extent_u = p.extent_v = 40;
  s.planes.push_back(p);
  s.intrinsics = odd_camera();
  std::mt19937_64 rng(4);
  Pose cam = dvl::testing::random_pose(rng, 0.1);
  cam.rotation = dvl::testing::exp_oracle((Vec6() << 0, 0, 0, 0.05, -0.08, 0.02).finished()).rotation;
  s.trajectory.push_back(cam);
  const DepthMap depth = render_depth(s, 0);
  const Vec3 n = p.axis_u.cross(p.axis_v);
  size_t checked = 0;
  for (int y = 0; y < s.intrinsics.height; ++y)
    for (int x = 0; x < s.intrinsics.width; ++x) {
      const Vec3 ray((x - s.intrinsics.cu) / s.intrinsics.fu, (y - s.intrinsics.cv) / s.intrinsics.fv, 1.0);
      const Vec3 dir = cam.rotation * ray;
      const double lambda = n.dot(p.origin - cam.translation) / n.dot(dir);
      ASSERT_TRUE(depth.is_valid(x, y));
      EXPECT_NEAR(depth.value(x, y), lambda, 1e-9);
      ++checked;
    }
  EXPECT_EQ(checked, static_cast<size_t>(65 * 49));
}

TEST(Render, DegenerateSceneIsRejected) {
  SceneSpec s = wall_scene(3.0, {0.0});
  s.planes[0].origin = Vec3(0.5, -50, 3.0);  // covers only part of the view
  try {
    render_sequence(s, StaticIllumination{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateScene);
  }
}

TEST(Render, WarpIdentityBetweenConsecutiveFrames) {
  const SceneSpec s = desk_scene(3);
  const RenderedSequence r = render_sequence(s, StaticIllumination{});
  const CameraIntrinsics& k = s.intrinsics;
  for (int f = 0; f + 1 < 3; ++f) {
    const ImageBuffer a = to_luminance(r.images[f]);
    const ImageBuffer b = to_luminance(r.images[f + 1]);
    const Pose b_from_a = inverse(r.poses[f + 1]) * r.poses[f];
    double sum = 0;
    size_t n = 0;
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x) {
        if (!r.depths[f].is_valid(x, y)) continue;
        const double z = r.depths[f].value(x, y);
        const Vec3 p = b_from_a * Vec3(z * (x - k.cu) / k.fu, z * (y - k.cv) / k.fv, z);
        if (p.z() <= 0) continue;
        const auto v = sample_bilinear(b, Vec2(k.fu * p.x() / p.z() + k.cu, k.fv * p.y() / p.z() + k.cv));
        if (!v) continue;
        sum += std::abs(a.at(x, y) - *v);
        ++n;
      }
    EXPECT_GT(n, static_cast<size_t>(k.width * k.height / 2));
    EXPECT_LT(sum / static_cast<double>(n), 0.02);
  }
}

TEST(Render, DeskSceneIntensityRange) {
  const RenderedSequence r = render_sequence(small_desk(1), StaticIllumination{});
  double hi = 0.0;
  for (double v : r.images[0].data) hi = std::max(hi, v);
  // headroom for the brightening benchmark conditions
  EXPECT_LT(hi, 0.65);
  EXPECT_GE(r.depths[0].valid_count(), static_cast<size_t>(0.8 * 64 * 48));
}

TEST(TrainingPairs, Counting) {
  const SceneSpec s = small_desk(4);
  const auto same = make_training_pairs(s, StaticIllumination{}, {StaticIllumination{}});
  ASSERT_EQ(same.size(), 4u);
  for (const auto& p : same) EXPECT_EQ(p.input, p.target);

  const auto three = make_training_pairs(s, StaticIllumination{},
                                         {desk_global_schedule(), desk_condition("local"), Flashlight{0.2}});
  EXPECT_EQ(three.size(), 12u);
  for (const auto& p : three) {
    EXPECT_EQ(p.input_pose.translation, p.target_pose.translation);
    EXPECT_EQ(p.input_pose.rotation, p.target_pose.rotation);
  }
}

TEST(TrainingPairs, TrajectoryMismatch) {
  const SceneSpec s = small_desk(2);
  const RenderedSequence canonical = render_sequence(s, StaticIllumination{});
  RenderedSequence other = canonical;
  other.poses[1].translation.x() += 0.01;
  try {
    make_training_pairs(canonical, {{"moved", other}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TrajectoryMismatch);
  }
}

TEST(ValueNoise, BoundedAndContinuous) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng), y = u(rng);
    const double v = value_noise(x, y, 3);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LT(std::abs(value_noise(x + 1e-6, y, 3) - v), 1e-4);
  }
}

TEST(Conditions, Names) {
  EXPECT_EQ(condition_name(StaticIllumination{}), "static");
  EXPECT_EQ(condition_name(desk_condition("global")), "global");
  EXPECT_EQ(condition_name(desk_condition("local")), "local");
  EXPECT_EQ(condition_name(desk_condition("flashlight")), "flashlight");
  EXPECT_THROW(desk_condition("sunset"), Error);
}
