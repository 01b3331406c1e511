#include "opencat/pipeline.hpp"

#include <cmath>

#include "opencat/error.hpp"

namespace opencat {
namespace {

BackboneSpec spec_from_keyvalue(const KeyValueFile& kv, const std::string& prefix, BackboneSpec spec) {
  if (auto name = kv.get_string(prefix + "_backbone")) {
    if (*name == "mobilenet" || *name == "mobilenet_v2") {
      spec = mobilenet_spec();
    } else if (*name == "densenet") {
      spec = densenet_spec();
    } else if (*name == "fallback") {
      spec = fallback_spec();
    } else {
      spec.name = *name;
    }
  }
  if (auto v = kv.get_number(prefix + "_input_size")) spec.input_size = static_cast<int>(*v);
  if (auto v = kv.get_number(prefix + "_feature_length")) spec.feature_length = static_cast<int>(*v);
  auto triple = [&](const std::string& key, std::array<float, 3>& dst) {
    if (auto v = kv.get_numbers(key)) {
      if (v->size() != 3) throw Error(ErrorCode::kConfigError, key + " needs three values");
      for (std::size_t i = 0; i < 3; ++i) dst[i] = static_cast<float>((*v)[i]);
    }
  };
  triple(prefix + "_mean", spec.mean);
  triple(prefix + "_std", spec.stddev);
  if (spec.name == "fallback") spec = fallback_spec(spec.input_size);
  return spec;
}

std::shared_ptr<const EmbeddingBackend> load_backend(const BackboneConfig& cfg, const std::string& stream,
                                                     std::vector<std::string>& warnings) {
  if (cfg.spec.name == "fallback") return std::make_shared<FallbackBackend>(cfg.spec.input_size);
  std::error_code ec;
  if (cfg.model.empty() || !std::filesystem::is_regular_file(cfg.model, ec)) {
    warnings.push_back("WARNING: " + stream + " backbone '" + cfg.spec.name + "' has no model file" +
                       (cfg.model.empty() ? std::string() : " at " + cfg.model.string()) +
                       "; using the fallback descriptor. Features are NOT comparable to the pretrained network.");
    return std::make_shared<FallbackBackend>();
  }
  return make_onnx_backend(cfg.spec, cfg.model);
}

}  // namespace

PipelineConfig PipelineConfig::mobilenet_profile() {
  PipelineConfig c;
  c.shape.spec = mobilenet_spec();
  c.color.spec = mobilenet_spec();
  c.w = 0.8;
  return c;
}

PipelineConfig PipelineConfig::densenet_profile() {
  PipelineConfig c;
  c.shape.spec = densenet_spec();
  c.color.spec = densenet_spec();
  c.w = 0.6;
  return c;
}

PipelineConfig PipelineConfig::fallback_profile() {
  PipelineConfig c;
  c.shape.spec = fallback_spec();
  c.color.spec = fallback_spec();
  c.w = 0.8;
  return c;
}

PipelineConfig PipelineConfig::from_keyvalue(const KeyValueFile& kv, const std::filesystem::path& base_dir) {
  PipelineConfig c = mobilenet_profile();
  if (auto profile = kv.get_string("profile")) {
    if (*profile == "mobilenet") {
      c = mobilenet_profile();
    } else if (*profile == "densenet") {
      c = densenet_profile();
    } else if (*profile == "fallback") {
      c = fallback_profile();
    } else {
      throw Error(ErrorCode::kConfigError, "unknown profile '" + *profile + "'");
    }
  }
  if (auto v = kv.get_number("w")) c.w = *v;
  if (auto v = kv.get_strings("spaces")) {
    c.spaces.clear();
    for (const auto& name : *v) c.spaces.push_back(parse_colorspace(name));
  }
  if (auto v = kv.get_number("resolution")) c.render.resolution = static_cast<int>(*v);
  if (auto v = kv.get_number("splat_radius")) c.render.splat_radius = static_cast<int>(*v);
  if (auto v = kv.get_number("margin")) c.render.margin = *v;
  if (auto v = kv.get_number("unknown_threshold")) c.unknown_threshold = *v;
  if (auto v = kv.get_number("category_capacity")) c.category_capacity = static_cast<std::size_t>(*v);

  c.shape.spec = spec_from_keyvalue(kv, "shape", c.shape.spec);
  c.color.spec = spec_from_keyvalue(kv, "color", c.color.spec);
  auto model_path = [&](const std::string& key) -> std::filesystem::path {
    auto v = kv.get_string(key);
    if (!v || v->empty()) return {};
    std::filesystem::path p(*v);
    return p.is_relative() ? base_dir / p : p;
  };
  c.shape.model = model_path("shape_model");
  c.color.model = model_path("color_model");
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_keyvalue(KeyValueFile::read(path), path.parent_path());
}

void PipelineConfig::validate() const {
  if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::kConfigError, "w must lie in [0, 1]");
  if (render.resolution < 16) throw Error(ErrorCode::kConfigError, "resolution must be at least 16");
  if (render.splat_radius < 0) throw Error(ErrorCode::kConfigError, "splat_radius must be non-negative");
  if (!(render.margin >= 0.0)) throw Error(ErrorCode::kConfigError, "margin must be non-negative");
  if (unknown_threshold && !(*unknown_threshold >= 0.0)) {
    throw Error(ErrorCode::kConfigError, "unknown_threshold must be non-negative");
  }
  validate_colorspace_list(spaces);
  validate_backbone_spec(shape.spec);
  validate_backbone_spec(color.spec);
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const EmbeddingBackend> shape,
                   std::shared_ptr<const EmbeddingBackend> color)
    : config_(std::move(config)), shape_(std::move(shape)), color_(std::move(color)) {
  config_.validate();
}

Pipeline Pipeline::create(const PipelineConfig& config) {
  config.validate();
  std::vector<std::string> warnings;
  auto shape = load_backend(config.shape, "shape", warnings);
  auto color = load_backend(config.color, "color", warnings);
  Pipeline p(config, std::move(shape), std::move(color));
  p.warnings_ = std::move(warnings);
  return p;
}

FeatureLayout Pipeline::layout() const {
  FeatureLayout l;
  l.shape_length = static_cast<std::size_t>(shape_->spec().feature_length);
  l.color_length = config_.spaces.size() * static_cast<std::size_t>(color_->spec().feature_length);
  l.spaces = config_.spaces;
  l.w = config_.w;
  l.shape_backbone = shape_->spec().name;
  l.color_backbone = color_->spec().name;
  return l;
}

ViewTriplet render_object(const ObjectCloud& cloud, const RenderOptions& options, LocalReferenceFrame* lrf_out) {
  LocalReferenceFrame lrf;
  try {
    lrf = construct_lrf(cloud);
  } catch (const Error& e) {
    rethrow_with_stage(e, "reference_frame");
  }
  if (lrf_out) *lrf_out = lrf;
  try {
    return render_views(transform_to_lrf(cloud, lrf), options);
  } catch (const Error& e) {
    rethrow_with_stage(e, "projection");
  }
}

ObjectRepresentation represent_object_detailed(const ObjectCloud& cloud, const Pipeline& pipeline) {
  ObjectRepresentation rep;
  rep.views = render_object(cloud, pipeline.config().render, &rep.lrf);
  try {
    rep.entropy = select_max_entropy(rep.views.color);
  } catch (const Error& e) {
    rethrow_with_stage(e, "view_selection");
  }
  try {
    const auto shape = embed_shape(rep.views.depth, pipeline.shape_backend());
    const auto color =
        embed_color(rep.views.color_of(rep.entropy.selected), pipeline.config().spaces, pipeline.color_backend());
    rep.feature = fuse(shape, color, pipeline.config().w);
  } catch (const Error& e) {
    rethrow_with_stage(e, "embedding");
  }
  rep.feature.layout = pipeline.layout();
  return rep;
}

FeatureVector represent_object(const ObjectCloud& cloud, const Pipeline& pipeline) {
  return represent_object_detailed(cloud, pipeline).feature;
}

}  // namespace opencat
