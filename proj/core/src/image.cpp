#include "opencat/image.hpp"

#include <algorithm>
#include <stdexcept>

#include "opencat/error.hpp"

namespace opencat {
namespace {

struct Tap {
  int index;
  double weight;
};

// For each destination cell, the source cells it overlaps and their weights.
std::vector<std::vector<Tap>> area_taps(int src, int dst) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * scale;
    const double hi = (i + 1) * scale;
    for (int k = static_cast<int>(lo); k < src && k < hi; ++k) {
      const double overlap = std::min<double>(hi, k + 1) - std::max<double>(lo, k);
      if (overlap > 0.0) taps[static_cast<std::size_t>(i)].push_back({k, overlap / scale});
    }
  }
  return taps;
}

}  // namespace

std::string_view view_name(ViewId view) {
  switch (view) {
    case ViewId::kFront: return "front";
    case ViewId::kSide: return "side";
    case ViewId::kTop: return "top";
  }
  return "front";
}

std::optional<ViewId> parse_view(std::string_view name) {
  for (ViewId v : kAllViews) {
    if (view_name(v) == name) return v;
  }
  return std::nullopt;
}

std::size_t DepthImage::foreground_count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](float d) { return d > 0.0f; }));
}

ColorImage ColorImage::blank(int width, int height, ViewId view) {
  ColorImage img;
  img.width = width;
  img.height = height;
  img.view = view;
  img.pixels.assign(static_cast<std::size_t>(width) * height, Rgb8{0, 0, 0});
  img.mask.assign(static_cast<std::size_t>(width) * height, 0);
  return img;
}

std::size_t ColorImage::foreground_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<float> resample_area(std::span<const float> src, int src_width, int src_height, int dst_width,
                                 int dst_height) {
  if (src_width <= 0 || src_height <= 0 || dst_width <= 0 || dst_height <= 0 ||
      src.size() != static_cast<std::size_t>(src_width) * src_height) {
    throw Error(ErrorCode::kEmptyInput, "resample_area: invalid dimensions");
  }
  if (src_width == dst_width && src_height == dst_height) return {src.begin(), src.end()};

  const auto col_taps = area_taps(src_width, dst_width);
  const auto row_taps = area_taps(src_height, dst_height);

  std::vector<double> horizontal(static_cast<std::size_t>(src_height) * dst_width, 0.0);
  for (int r = 0; r < src_height; ++r) {
    for (int c = 0; c < dst_width; ++c) {
      double acc = 0.0;
      for (const Tap& t : col_taps[static_cast<std::size_t>(c)]) {
        acc += t.weight * src[static_cast<std::size_t>(r) * src_width + t.index];
      }
      horizontal[static_cast<std::size_t>(r) * dst_width + c] = acc;
    }
  }
  std::vector<float> out(static_cast<std::size_t>(dst_width) * dst_height);
  for (int r = 0; r < dst_height; ++r) {
    for (int c = 0; c < dst_width; ++c) {
      double acc = 0.0;
      for (const Tap& t : row_taps[static_cast<std::size_t>(r)]) {
        acc += t.weight * horizontal[static_cast<std::size_t>(t.index) * dst_width + c];
      }
      out[static_cast<std::size_t>(r) * dst_width + c] = static_cast<float>(acc);
    }
  }
  return out;
}

PlanarImage resample_area(const PlanarImage& src, int dst_width, int dst_height) {
  PlanarImage out(src.channels, dst_width, dst_height);
  for (int c = 0; c < src.channels; ++c) {
    const auto plane = resample_area(src.plane(c), src.width, src.height, dst_width, dst_height);
    std::copy(plane.begin(), plane.end(), out.data.begin() + static_cast<std::ptrdiff_t>(c) * dst_width * dst_height);
  }
  return out;
}

}  // namespace opencat
