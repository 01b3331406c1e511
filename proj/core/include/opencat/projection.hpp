#pragma once

#include <array>

#include "opencat/cloud.hpp"
#include "opencat/image.hpp"

namespace opencat {

/// Axis-aligned cube in LRF coordinates, centered on the frame origin.
struct RenderVolume {
  double edge = 0.0;
  double margin = 0.0;

  double half() const { return 0.5 * edge; }
  friend bool operator==(const RenderVolume&, const RenderVolume&) = default;
};

/// Smallest origin-centered cube containing every point, enlarged by
/// `margin` on each side: edge = (1 + 2 margin) * 2 max|coordinate|.
/// Throws DegenerateCloud when all points sit at the origin.
RenderVolume fit_bounds(const ObjectCloud& cloud_in_lrf, double margin);

struct RenderOptions {
  int resolution = 224;
  int splat_radius = 1;  // square splat of (2r+1)^2 pixels
  double margin = 0.1;
};

/// Depth quantization step; depth values are multiples of 1/65535 so the
/// images survive 16-bit export unchanged.
inline constexpr int kDepthLevels = 65535;

struct ViewTriplet {
  std::array<DepthImage, 3> depth;
  std::array<ColorImage, 3> color;
  RenderVolume bounds;

  const DepthImage& depth_of(ViewId v) const { return depth[static_cast<std::size_t>(v)]; }
  const ColorImage& color_of(ViewId v) const { return color[static_cast<std::size_t>(v)]; }
};

/// Orthographic z-buffer rendering of an LRF-aligned cloud.
///
/// Cameras: front looks along -X (image right = +Y), side along -Y
/// (right = -X), top along -Z (right = -Y, up = +X); image up is +Z for the
/// two lateral views. Per pixel the point nearest the camera wins. Depth is
/// linear in the camera-axis coordinate, 1 at the nearest point of the cloud
/// and one quantization step at the far face of the volume; background is 0.
ViewTriplet render_views(const ObjectCloud& cloud_in_lrf, const RenderOptions& options = {});

ViewTriplet render_views(const ObjectCloud& cloud_in_lrf, const RenderVolume& bounds, int resolution,
                         int splat_radius);

}  // namespace opencat
