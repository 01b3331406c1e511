#pragma once

#include <array>
#include <optional>
#include <span>

#include "opencat/image.hpp"

namespace opencat {

inline constexpr int kEntropyBins = 256;

/// BT.601 luma of an 8-bit RGB pixel, in [0, 255].
double luma(const Rgb8& c);

/// Histogram bin of a pixel: luma rounded to the nearest integer level.
int luma_bin(const Rgb8& c);

/// Shannon entropy in bits of a histogram, with 0 log 0 = 0.
double histogram_entropy(std::span<const std::size_t> counts);

/// Entropy in bits of the luma histogram over foreground pixels only.
/// Throws EmptyView when the mask is empty.
double image_entropy(const ColorImage& img);

struct EntropyReport {
  /// Per-view entropy (bits), indexed by ViewId; empty views have no value.
  std::array<std::optional<double>, 3> entropy;
  ViewId selected = ViewId::kFront;
  int bins = kEntropyBins;
};

/// Picks the view with maximal entropy; ties go to front, then side, then
/// top. Empty views are skipped; throws EmptyView if all three are empty.
EntropyReport select_max_entropy(const std::array<ColorImage, 3>& views);

}  // namespace opencat
