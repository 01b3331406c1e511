#include <gtest/gtest.h>

#include <fstream>

#include "opencat/error.hpp"
#include "opencat/ibl.hpp"
#include "opencat/pipeline.hpp"
#include "opencat/synthetic.hpp"
#include "test_support.hpp"

using namespace opencat;
using namespace opencat::testing;

namespace {

const Pipeline& fallback_pipeline() {
  static const Pipeline p = Pipeline::create(PipelineConfig::fallback_profile());
  return p;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  return 1.0 - cosine_distance(a, b);
}

}  // namespace

TEST(Pipeline, ProfilesAndLayout) {
  EXPECT_EQ(PipelineConfig::mobilenet_profile().w, 0.8);
  EXPECT_EQ(PipelineConfig::densenet_profile().w, 0.6);
  const auto& p = fallback_pipeline();
  const FeatureLayout layout = p.layout();
  EXPECT_EQ(layout.shape_length, 240u);
  EXPECT_EQ(layout.color_length, 4u * 240u);
  EXPECT_TRUE(p.warnings().empty());
}

TEST(Pipeline, MissingModelFallsBackWithWarning) {
  PipelineConfig cfg = PipelineConfig::mobilenet_profile();
  cfg.shape.model = "/missing/shape.onnx";
  cfg.color.model = "/missing/color.onnx";
  const Pipeline p = Pipeline::create(cfg);
  EXPECT_EQ(p.shape_backend().spec().name, "fallback");
  ASSERT_EQ(p.warnings().size(), 2u);
  EXPECT_NE(p.warnings()[0].find("shape.onnx"), std::string::npos);
}

TEST(Pipeline, ConfigFileKeys) {
  TempDir dir;
  std::ofstream(dir / "p.toml") << "profile = \"densenet\"\nw = 0.3\nspaces = [\"LAB\", \"gray\"]\n"
                                   "resolution = 128\nunknown_threshold = 0.4\ncategory_capacity = 5\n"
                                   "shape_model = \"models/s.onnx\"\n";
  const PipelineConfig c = PipelineConfig::load(dir / "p.toml");
  EXPECT_EQ(c.w, 0.3);
  EXPECT_EQ(c.spaces, (std::vector<ColorspaceId>{ColorspaceId::kLAB, ColorspaceId::kGRAY}));
  EXPECT_EQ(c.render.resolution, 128);
  EXPECT_EQ(c.unknown_threshold, 0.4);
  EXPECT_EQ(c.category_capacity, 5u);
  EXPECT_EQ(c.shape.spec.feature_length, 132);
  EXPECT_EQ(c.shape.model, dir.path() / "models/s.onnx");

  std::ofstream(dir / "bad.toml") << "w = 2\n";
  EXPECT_THROW(PipelineConfig::load(dir / "bad.toml"), Error);
  std::ofstream(dir / "bad2.toml") << "spaces = [\"RGB\", \"RGB\"]\n";
  EXPECT_THROW(PipelineConfig::load(dir / "bad2.toml"), Error);
}

TEST(RepresentObject, DeterministicAndLengthMatchesLayout) {
  const ObjectCloud c = make_synthetic_object(2, 0, 0);
  const FeatureVector a = represent_object(c, fallback_pipeline());
  const FeatureVector b = represent_object(c, fallback_pipeline());
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.size(), 240u + 4u * 240u);
  EXPECT_EQ(a.layout, fallback_pipeline().layout());
}

TEST(RepresentObject, UniformScaleGivesIdenticalVector) {
  const ObjectCloud c = make_synthetic_object(4, 1, 3);
  EXPECT_EQ(represent_object(c, fallback_pipeline()).values,
            represent_object(scaled(c, 3.0), fallback_pipeline()).values);
}

TEST(RepresentObject, GravityRotationKeepsCosineSimilarity) {
  for (std::size_t cat = 0; cat < 6; ++cat) {
    const ObjectCloud c = make_synthetic_object(cat, 0, 1);
    const auto a = represent_object(c, fallback_pipeline()).values;
    for (double angle : {0.4, 1.9, 3.0}) {
      const auto b = represent_object(rotated_about_gravity(c, angle, Eigen::Vector3d(1, 2, 0)), fallback_pipeline());
      EXPECT_GE(cosine_similarity(a, b.values), 0.99) << synthetic_category_names()[cat] << " " << angle;
    }
  }
}

TEST(RepresentObject, ErrorsCarryStage) {
  ObjectCloud line;
  for (int i = 0; i < 10; ++i) line.points.push_back(make_point(i, 0, 0));
  try {
    represent_object(line, fallback_pipeline());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCloud);
    EXPECT_EQ(std::string(e.what()).rfind("reference_frame", 0), 0u);
  }
}

TEST(RepresentObject, DetailedExposesIntermediateProducts) {
  const ObjectCloud c = make_synthetic_object(0, 0, 0);
  const ObjectRepresentation r = represent_object_detailed(c, fallback_pipeline());
  EXPECT_EQ(r.views.depth_of(ViewId::kFront).width, 224);
  EXPECT_TRUE(r.entropy.entropy[static_cast<std::size_t>(r.entropy.selected)].has_value());
  EXPECT_EQ(r.feature.values, represent_object(c, fallback_pipeline()).values);
}
