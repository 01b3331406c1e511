#include "opencat/colorspace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "opencat/error.hpp"

namespace opencat {
namespace {

using namespace color_constants;

Vector3 affine(const Matrix3& m, const Vector3& offset, const Rgb8& c) {
  Vector3 out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = m[i][0] * c[0] + m[i][1] * c[1] + m[i][2] * c[2] + offset[i];
  }
  return out;
}

double srgb_to_linear(std::uint8_t v) {
  const double c = v / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

const std::array<double, 256>& linear_table() {
  static const auto table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = srgb_to_linear(static_cast<std::uint8_t>(i));
    return t;
  }();
  return table;
}

const std::array<double, 256>& optical_density_table() {
  static const auto table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = -std::log10((i + 1.0) / 256.0);
    return t;
  }();
  return table;
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

Vector3 to_hsv(const Rgb8& c) {
  const double r = c[0] / 255.0;
  const double g = c[1] / 255.0;
  const double b = c[2] / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  double h = 0.0;
  if (delta > 0.0) {
    if (c[0] >= c[1] && c[0] >= c[2]) {
      h = 60.0 * std::fmod((g - b) / delta, 6.0);
    } else if (c[1] >= c[2]) {
      h = 60.0 * ((b - r) / delta + 2.0);
    } else {
      h = 60.0 * ((r - g) / delta + 4.0);
    }
    if (h < 0.0) h += 360.0;
  }
  const double s = mx > 0.0 ? delta / mx : 0.0;
  return {h, s, mx};
}

Vector3 to_lab(const Rgb8& c) {
  const auto& lin = linear_table();
  const double rl = lin[c[0]];
  const double gl = lin[c[1]];
  const double bl = lin[c[2]];
  Vector3 xyz{};
  for (int i = 0; i < 3; ++i) {
    xyz[i] = kSrgbToXyz[i][0] * rl + kSrgbToXyz[i][1] * gl + kSrgbToXyz[i][2] * bl;
  }
  const double fx = lab_f(xyz[0] / kD65White[0]);
  const double fy = lab_f(xyz[1] / kD65White[1]);
  const double fz = lab_f(xyz[2] / kD65White[2]);
  return {std::clamp(116.0 * fy - 16.0, 0.0, 100.0), 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Vector3 to_hed(const Rgb8& c) {
  static const Matrix3 inv = hed_from_optical_density();
  const auto& od = optical_density_table();
  const Vector3 d{od[c[0]], od[c[1]], od[c[2]]};
  Vector3 out{};
  for (int k = 0; k < 3; ++k) out[k] = d[0] * inv[0][k] + d[1] * inv[1][k] + d[2] * inv[2][k];
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

}  // namespace

std::string_view colorspace_name(ColorspaceId id) {
  switch (id) {
    case ColorspaceId::kRGB: return "RGB";
    case ColorspaceId::kHED: return "HED";
    case ColorspaceId::kHSV: return "HSV";
    case ColorspaceId::kLAB: return "LAB";
    case ColorspaceId::kYCbCr: return "YCbCr";
    case ColorspaceId::kYIQ: return "YIQ";
    case ColorspaceId::kYUV: return "YUV";
    case ColorspaceId::kGRAY: return "GRAY";
  }
  return "RGB";
}

std::optional<ColorspaceId> try_parse_colorspace(std::string_view name) {
  const std::string key = lower(name);
  for (ColorspaceId id : kAllColorspaces) {
    if (lower(colorspace_name(id)) == key) return id;
  }
  if (key == "grey" || key == "grayscale") return ColorspaceId::kGRAY;
  return std::nullopt;
}

ColorspaceId parse_colorspace(std::string_view name) {
  if (auto id = try_parse_colorspace(name)) return *id;
  throw Error(ErrorCode::kInvalidColorspace, "unknown colorspace '" + std::string(name) + "'");
}

void validate_colorspace_list(std::span<const ColorspaceId> spaces) {
  if (spaces.empty()) throw Error(ErrorCode::kInvalidColorspace, "colorspace list is empty");
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    for (std::size_t j = i + 1; j < spaces.size(); ++j) {
      if (spaces[i] == spaces[j]) {
        throw Error(ErrorCode::kInvalidColorspace,
                    "colorspace '" + std::string(colorspace_name(spaces[i])) + "' listed twice");
      }
    }
  }
}

Matrix3 hed_from_optical_density() {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = kHedStains[i][j];
  }
  const Eigen::Matrix3d inv = m.inverse();
  Matrix3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i][j] = inv(i, j);
  }
  return out;
}

std::array<ChannelRange, 3> native_range(ColorspaceId id) {
  switch (id) {
    case ColorspaceId::kRGB:
    case ColorspaceId::kGRAY:
      return {{{0.0, 255.0}, {0.0, 255.0}, {0.0, 255.0}}};
    case ColorspaceId::kHSV: return {{{0.0, 360.0}, {0.0, 1.0}, {0.0, 1.0}}};
    case ColorspaceId::kLAB: return {{{0.0, 100.0}, {-128.0, 128.0}, {-128.0, 128.0}}};
    case ColorspaceId::kYUV:
    case ColorspaceId::kYCbCr: return {{{0.0, 255.0}, {0.0, 255.5}, {0.0, 255.5}}};
    case ColorspaceId::kYIQ: {
      std::array<ChannelRange, 3> r{};
      for (int i = 0; i < 3; ++i) {
        double lo = 0.0;
        double hi = 0.0;
        for (int j = 0; j < 3; ++j) (kYiq[i][j] < 0 ? lo : hi) += 255.0 * kYiq[i][j];
        r[i] = {lo, hi};
      }
      return r;
    }
    case ColorspaceId::kHED: {
      const Matrix3 inv = hed_from_optical_density();
      const double od_max = std::log10(256.0);
      std::array<ChannelRange, 3> r{};
      for (int k = 0; k < 3; ++k) {
        double lo = 0.0;
        double hi = 0.0;
        for (int c = 0; c < 3; ++c) (inv[c][k] < 0 ? lo : hi) += od_max * inv[c][k];
        r[k] = {lo, hi};
      }
      return r;
    }
  }
  return {};
}

Vector3 convert_pixel(const Rgb8& rgb, ColorspaceId target) {
  switch (target) {
    case ColorspaceId::kRGB: return {double(rgb[0]), double(rgb[1]), double(rgb[2])};
    case ColorspaceId::kHED: return to_hed(rgb);
    case ColorspaceId::kHSV: return to_hsv(rgb);
    case ColorspaceId::kLAB: return to_lab(rgb);
    case ColorspaceId::kYCbCr: return affine(kYCbCr, kYCbCrOffset, rgb);
    case ColorspaceId::kYIQ: return affine(kYiq, {0.0, 0.0, 0.0}, rgb);
    case ColorspaceId::kYUV: return affine(kYuv, kYuvOffset, rgb);
    case ColorspaceId::kGRAY: {
      const double y = kYuv[0][0] * rgb[0] + kYuv[0][1] * rgb[1] + kYuv[0][2] * rgb[2];
      return {y, y, y};
    }
  }
  throw Error(ErrorCode::kInvalidColorspace, "unknown colorspace id");
}

Vector3 hsv_to_rgb(const Vector3& hsv) {
  const double h = std::fmod(std::fmod(hsv[0], 360.0) + 360.0, 360.0) / 60.0;
  const double c = hsv[2] * hsv[1];
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = hsv[2] - c;
  double r = 0.0, g = 0.0, b = 0.0;
  switch (static_cast<int>(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {(r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0};
}

ColorConvertedView convert(const ColorImage& img, ColorspaceId target) {
  ColorConvertedView out;
  out.space = target;
  out.view = img.view;
  out.mask = img.mask;
  out.pixels = PlanarImage(3, img.width, img.height);
  const Vector3 background = convert_pixel({0, 0, 0}, target);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const Vector3 v = img.occupied(r, c) ? convert_pixel(img.at(r, c), target) : background;
      for (int k = 0; k < 3; ++k) out.pixels.at(k, r, c) = static_cast<float>(v[k]);
    }
  }
  return out;
}

}  // namespace opencat
