#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace opencat {

/// The three orthographic cameras, in tie-break order.
enum class ViewId { kFront = 0, kSide = 1, kTop = 2 };
inline constexpr std::array<ViewId, 3> kAllViews{ViewId::kFront, ViewId::kSide, ViewId::kTop};

std::string_view view_name(ViewId view);
std::optional<ViewId> parse_view(std::string_view name);

/// Normalized orthographic depth; 0 is background, foreground in (0, 1],
/// nearer is brighter. Row-major, row 0 at the top.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;
  ViewId view = ViewId::kFront;

  float at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::size_t foreground_count() const;

  friend bool operator==(const DepthImage&, const DepthImage&) = default;
};

using Rgb8 = std::array<std::uint8_t, 3>;

/// 8-bit color view with an occupancy mask; background is (0,0,0), mask 0.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb8> pixels;
  std::vector<std::uint8_t> mask;
  ViewId view = ViewId::kFront;

  static ColorImage blank(int width, int height, ViewId view = ViewId::kFront);

  const Rgb8& at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  bool occupied(int row, int col) const { return mask[static_cast<std::size_t>(row) * width + col] != 0; }
  void set(int row, int col, const Rgb8& c) {
    const std::size_t i = static_cast<std::size_t>(row) * width + col;
    pixels[i] = c;
    mask[i] = 1;
  }
  std::size_t foreground_count() const;

  friend bool operator==(const ColorImage&, const ColorImage&) = default;
};

/// Planar float image (channel-major), the input format of every backbone.
struct PlanarImage {
  int channels = 0;
  int width = 0;
  int height = 0;
  std::vector<float> data;

  PlanarImage() = default;
  PlanarImage(int c, int w, int h, float fill = 0.0f)
      : channels(c), width(w), height(h), data(static_cast<std::size_t>(c) * w * h, fill) {}

  float& at(int c, int row, int col) { return data[(static_cast<std::size_t>(c) * height + row) * width + col]; }
  float at(int c, int row, int col) const {
    return data[(static_cast<std::size_t>(c) * height + row) * width + col];
  }
  std::span<const float> plane(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * width * height, static_cast<std::size_t>(width) * height};
  }
};

/// Resamples one plane by exact area overlap (box filter). Downscaling by a
/// non-integer factor weights partially covered source pixels fractionally.
std::vector<float> resample_area(std::span<const float> src, int src_width, int src_height, int dst_width,
                                 int dst_height);

PlanarImage resample_area(const PlanarImage& src, int dst_width, int dst_height);

}  // namespace opencat
