#include "opencat/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "opencat/error.hpp"

namespace opencat {
namespace {

constexpr int kThumbnail = 8;
constexpr int kHistogramBins = 16;

std::vector<double> checked_embedding(const EmbeddingBackend& backend, const PlanarImage& input,
                                      std::string_view what) {
  std::vector<float> raw;
  try {
    raw = backend.embed(input);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendError, std::string(what) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendError, std::string(what) + ": " + e.what());
  }
  if (raw.size() != static_cast<std::size_t>(backend.spec().feature_length)) {
    throw Error(ErrorCode::kBackendError, std::string(what) + ": backbone '" + backend.spec().name +
                                              "' returned " + std::to_string(raw.size()) + " values, expected " +
                                              std::to_string(backend.spec().feature_length));
  }
  std::vector<double> out(raw.begin(), raw.end());
  if (!std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::kBackendError, std::string(what) + ": non-finite embedding");
  }
  return out;
}

}  // namespace

void validate_backbone_spec(const BackboneSpec& spec) {
  if (spec.feature_length <= 0) throw Error(ErrorCode::kConfigError, "backbone feature_length must be positive");
  if (spec.input_size <= 0) throw Error(ErrorCode::kConfigError, "backbone input_size must be positive");
  for (float s : spec.stddev) {
    if (!(s > 0.0f)) throw Error(ErrorCode::kConfigError, "backbone stddev must be positive");
  }
}

BackboneSpec mobilenet_spec() {
  return {"mobilenet_v2", 224, 1280, {0.485f, 0.456f, 0.406f}, {0.229f, 0.224f, 0.225f}};
}

BackboneSpec densenet_spec() {
  return {"densenet", 64, 132, {0.485f, 0.456f, 0.406f}, {0.229f, 0.224f, 0.225f}};
}

BackboneSpec fallback_spec(int input_size) {
  return {"fallback", input_size, 3 * (kThumbnail * kThumbnail + kHistogramBins), {0.0f, 0.0f, 0.0f},
          {1.0f, 1.0f, 1.0f}};
}

std::vector<float> fallback_descriptor(const PlanarImage& image) {
  const std::size_t per_channel = kThumbnail * kThumbnail + kHistogramBins;
  std::vector<double> acc(per_channel * static_cast<std::size_t>(image.channels), 0.0);
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (int c = 0; c < image.channels; ++c) {
    const std::span<const float> plane = image.plane(c);
    const auto thumb = resample_area(plane, image.width, image.height, kThumbnail, kThumbnail);
    double* block = acc.data() + per_channel * static_cast<std::size_t>(c);
    std::copy(thumb.begin(), thumb.end(), block);
    double* hist = block + kThumbnail * kThumbnail;
    for (float v : plane) {
      const double u = std::clamp(static_cast<double>(v), 0.0, 1.0);
      const int bin = std::min(kHistogramBins - 1, static_cast<int>(u * kHistogramBins));
      hist[bin] += 1.0;
    }
    for (int b = 0; b < kHistogramBins; ++b) hist[b] /= static_cast<double>(n);
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(norm > 0.0 ? acc[i] / norm : 0.0);
  return out;
}

PlanarImage prepare_input(const PlanarImage& unit_image, const BackboneSpec& spec) {
  if (unit_image.channels != 3) throw Error(ErrorCode::kBackendError, "backbone input must have 3 channels");
  PlanarImage out = resample_area(unit_image, spec.input_size, spec.input_size);
  const std::size_t plane = static_cast<std::size_t>(spec.input_size) * spec.input_size;
  for (int c = 0; c < 3; ++c) {
    const float mean = spec.mean[static_cast<std::size_t>(c)];
    const float inv = 1.0f / spec.stddev[static_cast<std::size_t>(c)];
    float* p = out.data.data() + plane * static_cast<std::size_t>(c);
    if (mean == 0.0f && inv == 1.0f) continue;
    for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - mean) * inv;
  }
  return out;
}

PlanarImage depth_to_planar(const DepthImage& depth) {
  PlanarImage out(3, depth.width, depth.height);
  const std::size_t plane = depth.pixels.size();
  for (int c = 0; c < 3; ++c) {
    std::copy(depth.pixels.begin(), depth.pixels.end(), out.data.begin() + static_cast<std::ptrdiff_t>(plane * c));
  }
  return out;
}

PlanarImage color_to_unit(const ColorConvertedView& view) {
  PlanarImage out = view.pixels;
  const auto ranges = native_range(view.space);
  const std::size_t plane = static_cast<std::size_t>(out.width) * out.height;
  for (int c = 0; c < out.channels; ++c) {
    const ChannelRange& r = ranges[static_cast<std::size_t>(c)];
    const double scale = 1.0 / (r.hi - r.lo);
    float* p = out.data.data() + plane * static_cast<std::size_t>(c);
    for (std::size_t i = 0; i < plane; ++i) {
      p[i] = static_cast<float>(std::clamp((p[i] - r.lo) * scale, 0.0, 1.0));
    }
  }
  return out;
}

std::vector<double> embed_shape(const std::array<DepthImage, 3>& views, const EmbeddingBackend& backend) {
  const int w = views[0].width;
  const int h = views[0].height;
  for (const DepthImage& v : views) {
    if (v.width != w || v.height != h) {
      throw Error(ErrorCode::kBackendError, "depth views must share one resolution");
    }
  }
  std::vector<double> merged;
  for (const DepthImage& v : views) {
    const PlanarImage input = prepare_input(depth_to_planar(v), backend.spec());
    const std::vector<double> e = checked_embedding(backend, input, "depth view '" + std::string(view_name(v.view)) + "'");
    if (merged.empty()) {
      merged = e;
    } else {
      for (std::size_t i = 0; i < e.size(); ++i) merged[i] = std::max(merged[i], e[i]);
    }
  }
  return merged;
}

std::vector<double> embed_color(const ColorImage& view, std::span<const ColorspaceId> spaces,
                                const EmbeddingBackend& backend) {
  validate_colorspace_list(spaces);
  std::vector<double> out;
  out.reserve(spaces.size() * static_cast<std::size_t>(backend.spec().feature_length));
  for (ColorspaceId space : spaces) {
    const PlanarImage input = prepare_input(color_to_unit(convert(view, space)), backend.spec());
    const auto e = checked_embedding(
        backend, input,
        "color view '" + std::string(view_name(view.view)) + "' in " + std::string(colorspace_name(space)));
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

FeatureVector fuse(std::span<const double> shape, std::span<const double> color, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::kInvalidFeature, "color weight w must lie in [0, 1]");
  if (shape.empty() && color.empty()) throw Error(ErrorCode::kInvalidFeature, "both feature blocks are empty");
  FeatureVector f;
  f.layout.shape_length = shape.size();
  f.layout.color_length = color.size();
  f.layout.w = w;
  f.values.reserve(shape.size() + color.size());
  for (double v : shape) f.values.push_back((1.0 - w) * v);
  for (double v : color) f.values.push_back(w * v);
  if (!std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::kInvalidFeature, "feature blocks contain non-finite values");
  }
  return f;
}

}  // namespace opencat
