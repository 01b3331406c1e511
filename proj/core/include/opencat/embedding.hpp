#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opencat/colorspace.hpp"
#include "opencat/image.hpp"

namespace opencat {

/// Static properties of a pretrained feature extractor.
struct BackboneSpec {
  std::string name;
  int input_size = 224;      // square input, pixels
  int feature_length = 0;    // floats per embedding
  std::array<float, 3> mean{0.0f, 0.0f, 0.0f};
  std::array<float, 3> stddev{1.0f, 1.0f, 1.0f};

  friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

void validate_backbone_spec(const BackboneSpec& spec);

/// MobileNetV2 pooled features: 224 px input, 1280 floats, ImageNet statistics.
BackboneSpec mobilenet_spec();
/// The compact DenseNet variant: 64 px input, 132 floats, ImageNet statistics.
BackboneSpec densenet_spec();
/// Deterministic descriptor used when no model file is available.
BackboneSpec fallback_spec(int input_size = 64);

/// A frozen feature extractor. `embed` receives a 3-channel image of
/// spec().input_size pixels that has already been normalized with the spec's
/// mean and standard deviation. Implementations are safe to call
/// concurrently and return spec().feature_length finite values.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual const BackboneSpec& spec() const = 0;
  virtual std::vector<float> embed(const PlanarImage& input) const = 0;
};

/// For each channel: an 8x8 area-averaged thumbnail (64 values) followed by
/// a 16-bin histogram of values clamped to [0, 1] (bin fractions, 16
/// values). The concatenation over channels is L2-normalized.
std::vector<float> fallback_descriptor(const PlanarImage& image);

class FallbackBackend final : public EmbeddingBackend {
 public:
  explicit FallbackBackend(int input_size = 64) : spec_(fallback_spec(input_size)) {}
  const BackboneSpec& spec() const override { return spec_; }
  std::vector<float> embed(const PlanarImage& input) const override { return fallback_descriptor(input); }

 private:
  BackboneSpec spec_;
};

/// Loads an ONNX model. Throws BackendError if the model cannot be loaded
/// or the build has no ONNX support.
std::unique_ptr<EmbeddingBackend> make_onnx_backend(const BackboneSpec& spec, const std::filesystem::path& model);
bool onnx_support_available();

/// Resizes a [0, 1] image to the backbone's input size (area averaging)
/// and applies the per-channel normalization.
PlanarImage prepare_input(const PlanarImage& unit_image, const BackboneSpec& spec);

/// Replicates a depth view into three identical channels.
PlanarImage depth_to_planar(const DepthImage& depth);

/// Maps each channel of a converted view from its native range to [0, 1].
PlanarImage color_to_unit(const ColorConvertedView& view);

/// Embeds the three depth views and merges them by element-wise maximum.
std::vector<double> embed_shape(const std::array<DepthImage, 3>& views, const EmbeddingBackend& backend);

/// Converts `view` into each colorspace in order, embeds each, and
/// concatenates the blocks.
std::vector<double> embed_color(const ColorImage& view, std::span<const ColorspaceId> spaces,
                                const EmbeddingBackend& backend);

struct FeatureLayout {
  std::size_t shape_length = 0;
  std::size_t color_length = 0;
  std::vector<ColorspaceId> spaces;
  double w = 0.0;
  std::string shape_backbone;
  std::string color_backbone;

  std::size_t total() const { return shape_length + color_length; }
  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct FeatureVector {
  std::vector<double> values;
  FeatureLayout layout;

  std::span<const double> shape_block() const { return {values.data(), layout.shape_length}; }
  std::span<const double> color_block() const {
    return {values.data() + layout.shape_length, layout.color_length};
  }
};

/// Weighted fusion: the shape block scaled by (1 - w) followed by the color
/// block scaled by w. Throws InvalidFeature for w outside [0, 1], two empty
/// blocks, or non-finite input.
FeatureVector fuse(std::span<const double> shape, std::span<const double> color, double w);

}  // namespace opencat
