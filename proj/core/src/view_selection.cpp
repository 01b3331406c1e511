#include "opencat/view_selection.hpp"

#include <cmath>
#include <vector>

#include "opencat/error.hpp"

namespace opencat {

double luma(const Rgb8& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

int luma_bin(const Rgb8& c) {
  const int bin = static_cast<int>(std::floor(luma(c) + 0.5));
  return bin < 0 ? 0 : (bin > kEntropyBins - 1 ? kEntropyBins - 1 : bin);
}

double histogram_entropy(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw Error(ErrorCode::kEmptyView, "entropy of an empty histogram");
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double image_entropy(const ColorImage& img) {
  std::vector<std::size_t> counts(kEntropyBins, 0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.mask[i]) ++counts[static_cast<std::size_t>(luma_bin(img.pixels[i]))];
  }
  try {
    return histogram_entropy(counts);
  } catch (const Error&) {
    throw Error(ErrorCode::kEmptyView, "view '" + std::string(view_name(img.view)) + "' has no foreground pixels");
  }
}

EntropyReport select_max_entropy(const std::array<ColorImage, 3>& views) {
  EntropyReport report;
  std::optional<double> best;
  for (ViewId v : kAllViews) {
    const ColorImage& img = views[static_cast<std::size_t>(v)];
    if (img.foreground_count() == 0) continue;
    const double h = image_entropy(img);
    report.entropy[static_cast<std::size_t>(v)] = h;
    if (!best || h > *best) {
      best = h;
      report.selected = v;
    }
  }
  if (!best) throw Error(ErrorCode::kEmptyView, "all three views are empty");
  return report;
}

}  // namespace opencat
