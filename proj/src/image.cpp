#include "dvl/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dvl/error.hpp"

namespace dvl {

namespace {

constexpr int kMinLevelSize = 8;

int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

bool ImageBuffer::valid() const {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) return false;
  if (data.size() != static_cast<size_t>(width) * height * channels) return false;
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

size_t ScalarMap::valid_count() const {
  return static_cast<size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

ImageBuffer to_luminance(const ImageBuffer& img) {
  if (img.channels == 1) return img;
  ImageBuffer out(img.width, img.height, 1);
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    const double* px = img.data.data() + i * 3;
    out.data[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

ImageBuffer binomial_blur(const ImageBuffer& img) {
  static constexpr double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int c = img.channels;
  ImageBuffer tmp(img.width, img.height, c);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -2; k <= 2; ++k) acc += kKernel[k + 2] * img.at(mirror(x + k, img.width), y, ch);
        tmp.at(x, y, ch) = acc;
      }
    }
  }
  ImageBuffer out(img.width, img.height, c);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -2; k <= 2; ++k) acc += kKernel[k + 2] * tmp.at(x, mirror(y + k, img.height), ch);
        out.at(x, y, ch) = acc;
      }
    }
  }
  return out;
}

ImageBuffer downsample(const ImageBuffer& img) {
  const ImageBuffer blurred = binomial_blur(img);
  ImageBuffer out(img.width / 2, img.height / 2, img.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int ch = 0; ch < img.channels; ++ch) {
        out.at(x, y, ch) = 0.25 * (blurred.at(2 * x, 2 * y, ch) + blurred.at(2 * x + 1, 2 * y, ch) +
                                   blurred.at(2 * x, 2 * y + 1, ch) + blurred.at(2 * x + 1, 2 * y + 1, ch));
      }
    }
  }
  return out;
}

Pyramid build_pyramid(const ImageBuffer& img, const CameraIntrinsics& k, int levels) {
  if (levels < 1) throw Error(ErrorCode::TooManyLevels, "pyramid needs at least one level");
  const int shrink = 1 << std::min(levels - 1, 30);
  if (levels > 31 || img.width / shrink < kMinLevelSize || img.height / shrink < kMinLevelSize) {
    throw Error(ErrorCode::TooManyLevels,
                std::to_string(levels) + " levels on " + std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  Pyramid pyr;
  pyr.levels.push_back({img, k});
  for (int l = 1; l < levels; ++l) {
    const PyramidLevel& prev = pyr.levels.back();
    pyr.levels.push_back({downsample(prev.image), prev.intrinsics.halved()});
  }
  return pyr;
}

DepthMap downsample_depth(const DepthMap& depth) {
  DepthMap out(depth.width / 2, depth.height / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double inv = 0.0;
      bool ok = true;
      for (int dy = 0; dy < 2 && ok; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          if (!depth.is_valid(2 * x + dx, 2 * y + dy)) {
            ok = false;
            break;
          }
          inv += 1.0 / depth.value(2 * x + dx, 2 * y + dy);
        }
      }
      if (ok) out.set(x, y, 4.0 / inv);
    }
  }
  return out;
}

std::optional<double> sample_bilinear(const ImageBuffer& img, const Vec2& pixel, int channel) {
  const double x = pixel.x();
  const double y = pixel.y();
  if (!(x >= 0.0 && y >= 0.0 && x <= img.width - 1 && y <= img.height - 1)) return std::nullopt;
  if (img.width == 1 || img.height == 1) {
    return img.at(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)), channel);
  }
  int x0 = std::min(static_cast<int>(x), img.width - 2);
  int y0 = std::min(static_cast<int>(y), img.height - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img.at(x0, y0, channel) + fx * (img.at(x0 + 1, y0, channel) - img.at(x0, y0, channel));
  const double bottom =
      img.at(x0, y0 + 1, channel) + fx * (img.at(x0 + 1, y0 + 1, channel) - img.at(x0, y0 + 1, channel));
  return top + fy * (bottom - top);
}

GradientField gradients(const ImageBuffer& img) {
  if (img.width < 3 || img.height < 3) {
    throw Error(ErrorCode::ImageTooSmall, std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  GradientField g;
  g.width = img.width;
  g.height = img.height;
  g.channels = img.channels;
  g.du.resize(img.data.size());
  g.dv.resize(img.data.size());
  const int w = img.width;
  const int h = img.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const size_t i = (static_cast<size_t>(y) * w + x) * img.channels + c;
        if (x == 0) {
          g.du[i] = img.at(1, y, c) - img.at(0, y, c);
        } else if (x == w - 1) {
          g.du[i] = img.at(w - 1, y, c) - img.at(w - 2, y, c);
        } else {
          g.du[i] = 0.5 * (img.at(x + 1, y, c) - img.at(x - 1, y, c));
        }
        if (y == 0) {
          g.dv[i] = img.at(x, 1, c) - img.at(x, 0, c);
        } else if (y == h - 1) {
          g.dv[i] = img.at(x, h - 1, c) - img.at(x, h - 2, c);
        } else {
          g.dv[i] = 0.5 * (img.at(x, y + 1, c) - img.at(x, y - 1, c));
        }
      }
    }
  }
  return g;
}

std::vector<int> select_pixels(const GradientField& grad, const ScalarMap& depth, double threshold) {
  if (grad.width != depth.width || grad.height != depth.height) {
    throw Error(ErrorCode::DimensionMismatch, "gradient and depth grids differ");
  }
  std::vector<int> out;
  for (int y = 1; y < grad.height - 1; ++y) {
    for (int x = 1; x < grad.width - 1; ++x) {
      if (!depth.is_valid(x, y)) continue;
      double best = 0.0;
      for (int c = 0; c < grad.channels; ++c) {
        best = std::max(best, std::hypot(grad.u(x, y, c), grad.v(x, y, c)));
      }
      if (best > threshold) out.push_back(y * grad.width + x);
    }
  }
  return out;
}

DisparityMap block_match_disparity(const ImageBuffer& left_in, const ImageBuffer& right_in, const StereoModel&,
                                   int window, int max_disp) {
  if (left_in.width != right_in.width || left_in.height != right_in.height) {
    throw Error(ErrorCode::DimensionMismatch, "stereo pair sizes differ");
  }
  if (window < 3 || window % 2 == 0) throw Error(ErrorCode::DimensionMismatch, "window must be odd and >= 3");
  const ImageBuffer left = to_luminance(left_in);
  const ImageBuffer right = to_luminance(right_in);
  const int w = left.width;
  const int h = left.height;
  const int r = window / 2;
  DisparityMap out(w, h);
  if (max_disp <= 0 || w <= window || h <= window) return out;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int nd = max_disp + 1;
  // cost[(d * h + y) * w + x]: SAD of the window at left pixel x against right pixel x - d.
  std::vector<double> cost(static_cast<size_t>(nd) * w * h, kInf);
  std::vector<double> integral(static_cast<size_t>(w + 1) * (h + 1));
  for (int d = 0; d < nd; ++d) {
    std::fill(integral.begin(), integral.end(), 0.0);
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        if (x >= d) row += std::abs(left.at(x, y) - right.at(x - d, y));
        integral[static_cast<size_t>(y + 1) * (w + 1) + x + 1] = integral[static_cast<size_t>(y) * (w + 1) + x + 1] + row;
      }
    }
    for (int y = r; y < h - r; ++y) {
      for (int x = std::max(r, r + d); x < w - r; ++x) {
        const auto at = [&](int xx, int yy) { return integral[static_cast<size_t>(yy) * (w + 1) + xx]; };
        const double s = at(x + r + 1, y + r + 1) - at(x - r, y + r + 1) - at(x + r + 1, y - r) + at(x - r, y - r);
        cost[(static_cast<size_t>(d) * h + y) * w + x] = s;
      }
    }
  }
  const auto c = [&](int d, int y, int x) { return cost[(static_cast<size_t>(d) * h + y) * w + x]; };

  // Winner with a uniqueness test against candidates at least 2 away.
  const auto pick = [&](auto&& cost_of, int dmax, double& refined) -> int {
    int best = -1;
    double best_cost = kInf;
    for (int d = 0; d <= dmax; ++d) {
      const double v = cost_of(d);
      if (v < best_cost) {
        best_cost = v;
        best = d;
      }
    }
    if (best < 0 || !std::isfinite(best_cost)) return -1;
    double second = kInf;
    for (int d = 0; d <= dmax; ++d) {
      if (std::abs(d - best) >= 2) second = std::min(second, cost_of(d));
    }
    constexpr double kUniqueness = 0.05;
    if (std::isfinite(second) && !(second > best_cost * (1.0 + kUniqueness) + 1e-9)) return -1;
    refined = best;
    if (best > 0 && best < dmax) {
      const double cm = cost_of(best - 1);
      const double cp = cost_of(best + 1);
      const double denom = cm - 2.0 * best_cost + cp;
      if (std::isfinite(denom) && denom > 0.0) refined = best + 0.5 * (cm - cp) / denom;
    }
    return best;
  };

  std::vector<int> right_disp(static_cast<size_t>(w) * h, -1);
  for (int y = r; y < h - r; ++y) {
    for (int xr = r; xr < w - r; ++xr) {
      const int dmax = std::min(max_disp, w - r - 1 - xr);
      double unused = 0.0;
      right_disp[static_cast<size_t>(y) * w + xr] = pick([&](int d) { return c(d, y, xr + d); }, dmax, unused);
    }
  }
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      const int dmax = std::min(max_disp, x - r);
      double refined = 0.0;
      const int best = pick([&](int d) { return c(d, y, x); }, dmax, refined);
      if (best <= 0) continue;
      const int xr = x - best;
      const int back = right_disp[static_cast<size_t>(y) * w + xr];
      if (back < 0 || std::abs(back - best) > 1) continue;
      if (refined > kMinDisparity) out.set(x, y, refined);
    }
  }
  return out;
}

DepthMap disparity_to_depth_map(const DisparityMap& disparity, const StereoModel& stereo) {
  DepthMap out(disparity.width, disparity.height);
  for (int y = 0; y < disparity.height; ++y) {
    for (int x = 0; x < disparity.width; ++x) {
      if (disparity.is_valid(x, y)) out.set(x, y, disparity_to_depth(stereo, disparity.value(x, y)));
    }
  }
  return out;
}

}  // namespace dvl
