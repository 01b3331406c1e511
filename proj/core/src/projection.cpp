#include "opencat/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "opencat/error.hpp"

namespace opencat {
namespace {

struct CameraCoords {
  double right;  // image +column direction
  double up;     // image -row direction
  double depth;  // larger is nearer to the camera
};

CameraCoords camera_coords(ViewId view, const Point& p) {
  switch (view) {
    case ViewId::kFront: return {p.y, p.z, p.x};
    case ViewId::kSide: return {-p.x, p.z, p.y};
    case ViewId::kTop: return {-p.y, p.x, p.z};
  }
  return {p.y, p.z, p.x};
}

int to_pixel(double coord, double edge, int resolution) {
  const double u = (coord / edge + 0.5) * resolution;
  return std::clamp(static_cast<int>(std::floor(u)), 0, resolution - 1);
}

}  // namespace

RenderVolume fit_bounds(const ObjectCloud& cloud_in_lrf, double margin) {
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw Error(ErrorCode::kDegenerateCloud, "render margin must be a non-negative number");
  }
  double reach = 0.0;
  for (const Point& p : cloud_in_lrf.points) {
    reach = std::max({reach, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
  }
  if (!(reach > 0.0) || !std::isfinite(reach)) {
    throw Error(ErrorCode::kDegenerateCloud, "cloud has zero extent; cannot fit render bounds");
  }
  return {(1.0 + 2.0 * margin) * 2.0 * reach, margin};
}

ViewTriplet render_views(const ObjectCloud& cloud_in_lrf, const RenderOptions& options) {
  return render_views(cloud_in_lrf, fit_bounds(cloud_in_lrf, options.margin), options.resolution,
                      options.splat_radius);
}

ViewTriplet render_views(const ObjectCloud& cloud_in_lrf, const RenderVolume& bounds, int resolution,
                         int splat_radius) {
  if (resolution < 16) throw Error(ErrorCode::kEmptyInput, "render resolution must be at least 16");
  if (splat_radius < 0) throw Error(ErrorCode::kEmptyInput, "splat radius must be non-negative");
  if (!(bounds.edge > 0.0)) throw Error(ErrorCode::kDegenerateCloud, "render volume has zero size");
  if (cloud_in_lrf.empty()) throw Error(ErrorCode::kDegenerateCloud, "cannot render an empty cloud");

  const double half = bounds.half();
  const std::size_t n_pixels = static_cast<std::size_t>(resolution) * resolution;
  constexpr double kEmpty = -std::numeric_limits<double>::infinity();

  ViewTriplet out;
  out.bounds = bounds;
  for (ViewId view : kAllViews) {
    std::vector<double> zbuf(n_pixels, kEmpty);
    ColorImage color = ColorImage::blank(resolution, resolution, view);
    double nearest = kEmpty;

    for (const Point& p : cloud_in_lrf.points) {
      const CameraCoords cc = camera_coords(view, p);
      const int col = to_pixel(cc.right, bounds.edge, resolution);
      const int row = to_pixel(-cc.up, bounds.edge, resolution);
      const double depth = std::clamp(cc.depth, -half, half);
      nearest = std::max(nearest, depth);
      for (int r = std::max(0, row - splat_radius); r <= std::min(resolution - 1, row + splat_radius); ++r) {
        for (int c = std::max(0, col - splat_radius); c <= std::min(resolution - 1, col + splat_radius); ++c) {
          const std::size_t i = static_cast<std::size_t>(r) * resolution + c;
          if (depth > zbuf[i]) {
            zbuf[i] = depth;
            color.set(r, c, {p.r, p.g, p.b});
          }
        }
      }
    }

    DepthImage depth_img;
    depth_img.width = resolution;
    depth_img.height = resolution;
    depth_img.view = view;
    depth_img.pixels.assign(n_pixels, 0.0f);
    const double span = nearest + half;
    for (std::size_t i = 0; i < n_pixels; ++i) {
      if (zbuf[i] == kEmpty) continue;
      const double unit = span > 0.0 ? (zbuf[i] + half) / span : 1.0;
      const double lo = 1.0 / kDepthLevels;
      const long q = std::lround((lo + (1.0 - lo) * unit) * kDepthLevels);
      depth_img.pixels[i] = static_cast<float>(static_cast<double>(std::clamp<long>(q, 1, kDepthLevels)) / kDepthLevels);
    }
    out.depth[static_cast<std::size_t>(view)] = std::move(depth_img);
    out.color[static_cast<std::size_t>(view)] = std::move(color);
  }
  return out;
}

}  // namespace opencat
