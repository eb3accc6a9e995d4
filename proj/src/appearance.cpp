#include "dvl/appearance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "dvl/error.hpp"
#include "dvl/png_io.hpp"

namespace dvl {

namespace {

constexpr double kMinGain = 1e-6;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::ConfigError, "not a number: " + std::string(text));
  return v;
}

}  // namespace

const AffineParams& AffineCorrection::for_frame(std::string_view frame_id) const {
  auto it = per_frame.find(std::string(frame_id));
  return it == per_frame.end() ? params : it->second;
}

std::filesystem::path external_directory(const std::filesystem::path& root, std::string_view condition,
                                         std::string_view canonical) {
  return root / (std::string(condition) + "-to-" + std::string(canonical));
}

ImageBuffer apply_affine_change(const ImageBuffer& img, const AffineParams& params) {
  ImageBuffer out = img;
  for (double& v : out.data) v = std::clamp(params.gain * v + params.offset, 0.0, 1.0);
  return out;
}

ImageBuffer resize_center_crop(const ImageBuffer& img, int width, int height) {
  if (img.width == width && img.height == height) return img;
  const double scale = std::max(static_cast<double>(width) / img.width, static_cast<double>(height) / img.height);
  const double off_x = 0.5 * (img.width * scale - width);
  const double off_y = 0.5 * (img.height * scale - height);
  ImageBuffer out(width, height, img.channels);
  for (int y = 0; y < height; ++y) {
    const double sy = std::clamp((y + 0.5 + off_y) / scale - 0.5, 0.0, img.height - 1.0);
    for (int x = 0; x < width; ++x) {
      const double sx = std::clamp((x + 0.5 + off_x) / scale - 0.5, 0.0, img.width - 1.0);
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = *sample_bilinear(img, {sx, sy}, c);
    }
  }
  return out;
}

ImageBuffer apply(const AppearanceTransform& transform, const ImageBuffer& img, std::string_view frame_id) {
  return std::visit(
      overloaded{
          [&](const IdentityTransform&) { return img; },
          [&](const AffineCorrection& t) {
            const AffineParams& p = t.for_frame(frame_id);
            if (std::abs(p.gain) < kMinGain) throw Error(ErrorCode::ZeroGain, "gain " + format_number(p.gain));
            ImageBuffer out = img;
            for (double& v : out.data) v = std::clamp((v - p.offset) / p.gain, 0.0, 1.0);
            return out;
          },
          [&](const ExternalPrecomputed& t) {
            const auto path = t.directory / (std::string(frame_id) + ".png");
            if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFrame, path.string());
            ImageBuffer loaded = load_image_png(path);
            if (loaded.channels != img.channels) loaded = img.channels == 1 ? to_luminance(loaded) : loaded;
            if (loaded.channels != img.channels) {
              throw Error(ErrorCode::DimensionMismatch, "channel count differs for " + path.string());
            }
            ImageBuffer out = resize_center_crop(loaded, img.width, img.height);
            for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
            return out;
          },
      },
      transform);
}

std::string describe(const AppearanceTransform& transform) {
  return std::visit(overloaded{
                        [](const IdentityTransform&) { return std::string("identity"); },
                        [](const AffineCorrection& t) {
                          std::string s = "affine:" + format_number(t.params.gain) + "," + format_number(t.params.offset);
                          if (!t.per_frame.empty()) s += "+per-frame(" + std::to_string(t.per_frame.size()) + ")";
                          return s;
                        },
                        [](const ExternalPrecomputed& t) { return "external:" + t.directory.string(); },
                    },
                    transform);
}

AppearanceTransform parse_transform(std::string_view text) {
  if (text == "identity") return IdentityTransform{};
  if (text.starts_with("affine:")) {
    const auto body = text.substr(7);
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) throw Error(ErrorCode::ConfigError, "expected affine:a,b");
    AffineCorrection t;
    t.params = {parse_number(body.substr(0, comma)), parse_number(body.substr(comma + 1))};
    return t;
  }
  if (text.starts_with("external:") && text.size() > 9) {
    return ExternalPrecomputed{std::filesystem::path(std::string(text.substr(9)))};
  }
  throw Error(ErrorCode::ConfigError, "unknown transform '" + std::string(text) + "'");
}

}  // namespace dvl
