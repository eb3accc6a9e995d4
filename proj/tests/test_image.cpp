#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dvl/error.hpp"
#include "dvl/image.hpp"
#include "dvl/png_io.hpp"
#include "support.hpp"

using namespace dvl;

namespace {

ImageBuffer ramp(int w, int h, double a) {
  ImageBuffer img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = a * x;
  return img;
}

// Random texture smoothed with a 5x5 box filter, periodic in x.
ImageBuffer periodic_texture(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> noise(static_cast<size_t>(w) * h);
  for (double& v : noise) v = u(rng);
  ImageBuffer img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          const int xx = ((x + dx) % w + w) % w;
          s += noise[static_cast<size_t>(yy) * w + xx];
        }
      img.at(x, y) = s / 25.0;
    }
  }
  return img;
}

DepthMap all_valid(int w, int h, double d = 1.0) {
  DepthMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, d);
  return m;
}

}  // namespace

TEST(Pyramid, ConstantImageStaysConstant) {
  const auto k = dvl::testing::test_intrinsics(64, 48);
  const Pyramid p = build_pyramid(ImageBuffer(64, 48, 1, 0.5), k, 3);
  ASSERT_EQ(p.levels.size(), 3u);
  for (const auto& l : p.levels)
    for (double v : l.image.data) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Pyramid, LevelSizesAndIntrinsics) {
  const auto k = dvl::testing::test_intrinsics(256, 192);
  const Pyramid p = build_pyramid(ImageBuffer(256, 192, 3, 0.2), k, 4);
  const int sizes[4][2] = {{256, 192}, {128, 96}, {64, 48}, {32, 24}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(p.levels[i].image.width, sizes[i][0]);
    EXPECT_EQ(p.levels[i].image.height, sizes[i][1]);
    EXPECT_EQ(p.levels[i].image.channels, 3);
    EXPECT_EQ(p.levels[i].intrinsics.width, sizes[i][0]);
  }
  EXPECT_DOUBLE_EQ(p.levels[1].intrinsics.cu, (k.cu + 0.5) / 2 - 0.5);
}

TEST(Pyramid, TooManyLevels) {
  const auto k = dvl::testing::test_intrinsics(256, 192);
  try {
    build_pyramid(ImageBuffer(256, 192, 1), k, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyLevels);
  }
}

TEST(Pyramid, MeanPreservedForSmoothImage) {
  const auto k = dvl::testing::test_intrinsics(128, 96);
  const dvl::testing::SmoothTexture tex;
  ImageBuffer img(128, 96, 1);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 128; ++x) img.at(x, y) = tex(x * 0.05, y * 0.05);
  const Pyramid p = build_pyramid(img, k, 3);
  const auto mean = [](const ImageBuffer& b) {
    return std::accumulate(b.data.begin(), b.data.end(), 0.0) / static_cast<double>(b.data.size());
  };
  EXPECT_NEAR(mean(p.levels[1].image), mean(img), 1e-3);
  EXPECT_NEAR(mean(p.levels[2].image), mean(img), 1e-3);
}

TEST(SampleBilinear, Examples) {
  ImageBuffer img(2, 2, 1);
  img.at(0, 0) = 0;
  img.at(1, 0) = 0;
  img.at(0, 1) = 1;
  img.at(1, 1) = 1;
  EXPECT_EQ(*sample_bilinear(img, Vec2(0.5, 0.5)), 0.5);
  EXPECT_EQ(*sample_bilinear(img, Vec2(1, 1)), 1.0);
  const ImageBuffer r = ramp(16, 8, 1.0 / 15.0);
  EXPECT_NEAR(*sample_bilinear(r, Vec2(1.25, 2.0)), 1.25 / 15.0, 1e-15);
  EXPECT_FALSE(sample_bilinear(r, Vec2(15.01, 2.0)).has_value());
  EXPECT_FALSE(sample_bilinear(r, Vec2(-0.01, 2.0)).has_value());
}

TEST(SampleBilinear, ReproducesAffineFunctions) {
  ImageBuffer img(20, 15, 1);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 20; ++x) img.at(x, y) = 0.1 + 0.01 * x - 0.02 * y;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 19), v(0, 14);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng), y = v(rng);
    EXPECT_NEAR(*sample_bilinear(img, Vec2(x, y)), 0.1 + 0.01 * x - 0.02 * y, 1e-14);
    EXPECT_NEAR(sample_bilinear_unchecked(img, x, y), 0.1 + 0.01 * x - 0.02 * y, 1e-14);
  }
}

TEST(Gradients, Examples) {
  const GradientField c = gradients(ImageBuffer(10, 10, 1, 0.3));
  for (double v : c.du) EXPECT_EQ(v, 0.0);
  for (double v : c.dv) EXPECT_EQ(v, 0.0);
  const GradientField r = gradients(ramp(10, 6, 0.05));
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) {
      EXPECT_NEAR(r.u(x, y), 0.05, 1e-15);
      EXPECT_NEAR(r.v(x, y), 0.0, 1e-15);
    }
  try {
    gradients(ImageBuffer(2, 5, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
}

TEST(Gradients, MatchFiniteDifferencesOfSampler) {
  const ImageBuffer img = periodic_texture(24, 18, 3);
  const GradientField g = gradients(img);
  for (int y = 1; y < 17; ++y)
    for (int x = 1; x < 23; ++x) {
      const double fu = (*sample_bilinear(img, Vec2(x + 1, y)) - *sample_bilinear(img, Vec2(x - 1, y))) / 2;
      const double fv = (*sample_bilinear(img, Vec2(x, y + 1)) - *sample_bilinear(img, Vec2(x, y - 1))) / 2;
      EXPECT_NEAR(g.u(x, y), fu, 1e-9);
      EXPECT_NEAR(g.v(x, y), fv, 1e-9);
    }
}

TEST(SelectPixels, Examples) {
  EXPECT_TRUE(select_pixels(gradients(ImageBuffer(12, 12, 1, 0.4)), all_valid(12, 12), 0.02).empty());

  ImageBuffer edge(12, 8, 1, 0.2);
  for (int y = 0; y < 8; ++y)
    for (int x = 6; x < 12; ++x) edge.at(x, y) = 0.8;
  const auto sel = select_pixels(gradients(edge), all_valid(12, 8), 0.1);
  ASSERT_FALSE(sel.empty());
  for (int idx : sel) {
    const int x = idx % 12, y = idx / 12;
    EXPECT_TRUE(x == 5 || x == 6);
    EXPECT_GT(y, 0);
    EXPECT_LT(y, 7);
  }
  EXPECT_EQ(sel.size(), 2u * 6u);
  EXPECT_TRUE(std::is_sorted(sel.begin(), sel.end()));

  const ImageBuffer tex = periodic_texture(12, 8, 5);
  const auto all = select_pixels(gradients(tex), all_valid(12, 8), 0.0);
  EXPECT_EQ(all.size(), 10u * 6u);
}

TEST(SelectPixels, RequiresValidDepth) {
  const ImageBuffer tex = periodic_texture(12, 8, 5);
  DepthMap depth = all_valid(12, 8);
  depth.mask[depth.index(3, 3)] = 0;
  const auto sel = select_pixels(gradients(tex), depth, 0.0);
  EXPECT_EQ(std::count(sel.begin(), sel.end(), 3 * 12 + 3), 0);
}

TEST(SelectPixels, MonotoneInThreshold) {
  const ImageBuffer tex = periodic_texture(40, 30, 7);
  const GradientField g = gradients(tex);
  const DepthMap d = all_valid(40, 30);
  auto prev = select_pixels(g, d, 0.0);
  for (double t = 0.005; t < 0.2; t += 0.005) {
    const auto cur = select_pixels(g, d, t);
    EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
    prev = cur;
  }
}

TEST(BlockMatch, RecoversIntegerShift) {
  const int w = 96, h = 64, shift = 4;
  const ImageBuffer left = periodic_texture(w, h, 9);
  ImageBuffer right(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) right.at(x, y) = left.at((x + shift) % w, y);
  const StereoModel s{dvl::testing::test_intrinsics(w, h), 0.1};
  const DisparityMap d = block_match_disparity(left, right, s, 7, 16);
  size_t valid = 0, good = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!d.is_valid(x, y)) continue;
      ++valid;
      if (std::abs(d.value(x, y) - shift) <= 0.5) ++good;
    }
  EXPECT_GT(valid, static_cast<size_t>(w * h / 2));
  EXPECT_GE(static_cast<double>(good), 0.95 * static_cast<double>(valid));
}

TEST(BlockMatch, TexturelessAndZeroRange) {
  const StereoModel s{dvl::testing::test_intrinsics(40, 30), 0.1};
  const ImageBuffer flat(40, 30, 1, 0.5);
  EXPECT_EQ(block_match_disparity(flat, flat, s, 5, 8).valid_count(), 0u);
  const ImageBuffer tex = periodic_texture(40, 30, 2);
  EXPECT_EQ(block_match_disparity(tex, tex, s, 5, 0).valid_count(), 0u);
  try {
    block_match_disparity(tex, ImageBuffer(39, 30, 1), s, 5, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Luminance, Weights) {
  ImageBuffer rgb(1, 1, 3);
  rgb.at(0, 0, 0) = 1.0;
  rgb.at(0, 0, 1) = 0.5;
  rgb.at(0, 0, 2) = 0.25;
  EXPECT_NEAR(to_luminance(rgb).at(0, 0), 0.299 + 0.587 * 0.5 + 0.114 * 0.25, 1e-15);
}

TEST(DepthDownsample, AveragesInverseDepthOfFullBlocks) {
  DepthMap d(4, 2);
  d.set(0, 0, 1.0);
  d.set(1, 0, 2.0);
  d.set(0, 1, 1.0);
  d.set(1, 1, 2.0);
  d.set(2, 0, 3.0);  // incomplete block
  const DepthMap half = downsample_depth(d);
  ASSERT_EQ(half.width, 2);
  EXPECT_TRUE(half.is_valid(0, 0));
  EXPECT_NEAR(half.value(0, 0), 1.0 / ((1.0 + 0.5 + 1.0 + 0.5) / 4), 1e-15);
  EXPECT_FALSE(half.is_valid(1, 0));
}

TEST(PngIo, RoundTripsQuantizedData) {
  const auto dir = dvl::testing::scratch_dir("png");
  const ImageBuffer img = periodic_texture(17, 9, 4);
  save_image_png(dir / "a8.png", img, 8);
  save_image_png(dir / "a16.png", img, 16);
  EXPECT_EQ(load_image_png(dir / "a8.png"), quantized(img, 8));
  EXPECT_EQ(load_image_png(dir / "a16.png"), quantized(img, 16));
  for (size_t i = 0; i < img.data.size(); ++i) {
    EXPECT_NEAR(quantized(img, 8).data[i], img.data[i], 0.5 / 255 + 1e-12);
  }

  DepthMap depth(5, 4);
  depth.set(1, 1, 2.5);
  depth.set(3, 2, 0.73);
  save_depth_png(dir / "d.png", depth);
  const DepthMap back = load_depth_png(dir / "d.png");
  EXPECT_EQ(back, quantized(depth, kDefaultDepthScale));
  EXPECT_EQ(back.valid_count(), 2u);
  EXPECT_NEAR(back.value(3, 2), 0.73, 1e-4);
}

TEST(PngIo, MissingFileIsIoFailure) {
  try {
    load_image_png("/nonexistent/x.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoFailure);
  }
}
