#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "opencat/image.hpp"

namespace opencat {

enum class ColorspaceId { kRGB, kHED, kHSV, kLAB, kYCbCr, kYIQ, kYUV, kGRAY };

inline constexpr std::array<ColorspaceId, 8> kAllColorspaces{
    ColorspaceId::kRGB,   ColorspaceId::kHED, ColorspaceId::kHSV, ColorspaceId::kLAB,
    ColorspaceId::kYCbCr, ColorspaceId::kYIQ, ColorspaceId::kYUV, ColorspaceId::kGRAY};

std::string_view colorspace_name(ColorspaceId id);
/// Case-insensitive lookup; throws InvalidColorspace for unknown names.
ColorspaceId parse_colorspace(std::string_view name);
std::optional<ColorspaceId> try_parse_colorspace(std::string_view name);
/// Throws InvalidColorspace if `spaces` is empty or repeats an entry.
void validate_colorspace_list(std::span<const ColorspaceId> spaces);

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

namespace color_constants {

/// RGB -> YUV rows exactly as published, with the standard chroma offset.
inline constexpr Matrix3 kYuv{{{0.299, 0.587, 0.114}, {-0.168, -0.331, 0.500}, {0.500, -0.418, -0.0813}}};
inline constexpr Vector3 kYuvOffset{0.0, 128.0, 128.0};

/// NTSC YIQ.
inline constexpr Matrix3 kYiq{{{0.299, 0.587, 0.114}, {0.5959, -0.2746, -0.3213}, {0.2115, -0.5227, 0.3112}}};

/// BT.601 full-range (JFIF) YCbCr.
inline constexpr Matrix3 kYCbCr{
    {{0.299, 0.587, 0.114}, {-0.168736, -0.331264, 0.5}, {0.5, -0.418688, -0.081312}}};
inline constexpr Vector3 kYCbCrOffset{0.0, 128.0, 128.0};

/// Hematoxylin, eosin and DAB optical-density vectors (rows).
inline constexpr Matrix3 kHedStains{{{0.65, 0.70, 0.29}, {0.07, 0.99, 0.11}, {0.27, 0.57, 0.78}}};

/// Linear sRGB -> CIE XYZ (D65).
inline constexpr Matrix3 kSrgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                                     {0.2126729, 0.7151522, 0.0721750},
                                     {0.0193339, 0.1191920, 0.9503041}}};
inline constexpr Vector3 kD65White{0.95047, 1.0, 1.08883};

}  // namespace color_constants

struct ChannelRange {
  double lo = 0.0;
  double hi = 255.0;
};

/// Range every channel of a converted view falls in, for 8-bit RGB input.
/// RGB, GRAY: [0, 255]. HSV: H [0, 360), S and V [0, 1]. LAB: L [0, 100],
/// a and b nominally [-128, 128]. YUV and YCbCr: Y [0, 255], chroma within
/// [0, 255.5] (no clamping). YIQ: I +-151.96, Q +-133.30. HED: bounds derived
/// from the inverse stain matrix over optical densities in [0, log10 256].
std::array<ChannelRange, 3> native_range(ColorspaceId id);

/// Converts one 8-bit RGB pixel.
Vector3 convert_pixel(const Rgb8& rgb, ColorspaceId target);

/// Inverse HSV transform (H in degrees, S and V in [0, 1]) to RGB in [0, 255].
Vector3 hsv_to_rgb(const Vector3& hsv);

/// Inverse of the HED stain matrix (row-vector convention: stains = OD * M^-1).
Matrix3 hed_from_optical_density();

struct ColorConvertedView {
  ColorspaceId space = ColorspaceId::kRGB;
  ViewId view = ViewId::kFront;
  PlanarImage pixels;  // 3 channels, native range
  std::vector<std::uint8_t> mask;
};

/// Per-pixel conversion. Background pixels hold the transform of (0, 0, 0)
/// and keep mask 0.
ColorConvertedView convert(const ColorImage& img, ColorspaceId target);

}  // namespace opencat
