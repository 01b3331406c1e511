#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opencat/cloud.hpp"
#include "opencat/embedding.hpp"
#include "opencat/keyvalue.hpp"
#include "opencat/projection.hpp"
#include "opencat/reference_frame.hpp"
#include "opencat/view_selection.hpp"

namespace opencat {

struct BackboneConfig {
  BackboneSpec spec;
  std::filesystem::path model;  // empty: use the fallback descriptor
};

/// Everything that determines the object representation.
struct PipelineConfig {
  RenderOptions render;
  BackboneConfig shape;
  BackboneConfig color;
  std::vector<ColorspaceId> spaces{ColorspaceId::kRGB, ColorspaceId::kHSV, ColorspaceId::kYCbCr,
                                   ColorspaceId::kYUV};
  double w = 0.8;
  std::optional<double> unknown_threshold;  // cosine distance; disabled by default
  std::size_t category_capacity = 0;        // 0 = unbounded

  /// MobileNet for both streams, w = 0.8.
  static PipelineConfig mobilenet_profile();
  /// DenseNet for both streams, w = 0.6.
  static PipelineConfig densenet_profile();
  /// Fallback descriptor for both streams; needs no model files.
  static PipelineConfig fallback_profile();

  /// Reads the keys understood by the pipeline (see README). Relative model
  /// paths are resolved against `base_dir`.
  static PipelineConfig from_keyvalue(const KeyValueFile& kv, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);

  void validate() const;
};

/// Loaded backbones plus the configuration that produced them.
class Pipeline {
 public:
  /// Loads both backbones. A missing model file selects the fallback
  /// descriptor and records a warning.
  static Pipeline create(const PipelineConfig& config);
  Pipeline(PipelineConfig config, std::shared_ptr<const EmbeddingBackend> shape,
           std::shared_ptr<const EmbeddingBackend> color);

  const PipelineConfig& config() const { return config_; }
  const EmbeddingBackend& shape_backend() const { return *shape_; }
  const EmbeddingBackend& color_backend() const { return *color_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Layout of every vector this pipeline produces.
  FeatureLayout layout() const;

 private:
  PipelineConfig config_;
  std::shared_ptr<const EmbeddingBackend> shape_;
  std::shared_ptr<const EmbeddingBackend> color_;
  std::vector<std::string> warnings_;
};

/// Intermediate products of one pass through the pipeline.
struct ObjectRepresentation {
  LocalReferenceFrame lrf;
  ViewTriplet views;
  EntropyReport entropy;
  FeatureVector feature;
};

/// LRF -> orthographic rendering -> max-entropy color view -> shape and
/// color embeddings -> weighted fusion. Errors keep their code and carry the
/// failing stage in the message.
ObjectRepresentation represent_object_detailed(const ObjectCloud& cloud, const Pipeline& pipeline);
FeatureVector represent_object(const ObjectCloud& cloud, const Pipeline& pipeline);

/// Front half of the pipeline shared by the CLI and the service.
ViewTriplet render_object(const ObjectCloud& cloud, const RenderOptions& options, LocalReferenceFrame* lrf = nullptr);

}  // namespace opencat
