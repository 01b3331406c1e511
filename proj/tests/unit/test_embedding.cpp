#include <gtest/gtest.h>

#include <cmath>

#include "opencat/embedding.hpp"
#include "opencat/error.hpp"
#include "test_support.hpp"

using namespace opencat;
using namespace opencat::testing;

namespace {

// Straightforward fallback descriptor for images whose side is a multiple of 8.
std::vector<double> fallback_oracle(const PlanarImage& img) {
  std::vector<double> out;
  const int bw = img.width / 8, bh = img.height / 8;
  for (int c = 0; c < img.channels; ++c) {
    for (int by = 0; by < 8; ++by) {
      for (int bx = 0; bx < 8; ++bx) {
        double s = 0.0;
        for (int y = 0; y < bh; ++y) {
          for (int x = 0; x < bw; ++x) s += img.at(c, by * bh + y, bx * bw + x);
        }
        out.push_back(s / (bw * bh));
      }
    }
    std::vector<double> hist(16, 0.0);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double v = std::clamp<double>(img.at(c, y, x), 0.0, 1.0);
        hist[std::min(15, static_cast<int>(std::floor(v * 16)))] += 1.0;
      }
    }
    for (double h : hist) out.push_back(h / (img.width * img.height));
  }
  double n = 0.0;
  for (double v : out) n += v * v;
  for (double& v : out) v /= std::sqrt(n);
  return out;
}

// Deterministic stand-in with an arbitrary spec; the embedding is a few
// image statistics spread over the feature length.
class StatsBackend final : public EmbeddingBackend {
 public:
  explicit StatsBackend(BackboneSpec spec, int wrong_length = -1) : spec_(std::move(spec)), wrong_(wrong_length) {}
  const BackboneSpec& spec() const override { return spec_; }
  std::vector<float> embed(const PlanarImage& in) const override {
    const int n = wrong_ >= 0 ? wrong_ : spec_.feature_length;
    std::vector<float> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = in.data[(static_cast<std::size_t>(i) * 7919) % in.data.size()] + 0.001f * i;
    return out;
  }

 private:
  BackboneSpec spec_;
  int wrong_;
};

DepthImage depth_view(std::mt19937_64& rng, int size, ViewId v) {
  DepthImage d;
  d.width = d.height = size;
  d.view = v;
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int i = 0; i < size * size; ++i) d.pixels.push_back(u(rng) < 0.5f ? 0.0f : u(rng));
  return d;
}

}  // namespace

TEST(BackboneSpecs, TableValues) {
  EXPECT_EQ(mobilenet_spec().feature_length, 1280);
  EXPECT_EQ(mobilenet_spec().input_size, 224);
  EXPECT_EQ(densenet_spec().feature_length, 132);
  EXPECT_EQ(densenet_spec().input_size, 64);
  EXPECT_EQ(fallback_spec().feature_length, 240);
}

TEST(FallbackDescriptor, MatchesOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(-0.2f, 1.2f);
  for (int size : {8, 16, 64}) {
    PlanarImage img(3, size, size);
    for (auto& v : img.data) v = u(rng);
    const auto got = fallback_descriptor(img);
    const auto want = fallback_oracle(img);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-6);
  }
}

TEST(FallbackDescriptor, ConstantImage) {
  const PlanarImage img(3, 16, 16, 0.5f);
  const auto d = fallback_descriptor(img);
  // Per channel: 64 copies of 0.5 and a one-hot histogram at bin 8.
  const double raw_norm = std::sqrt(3 * (64 * 0.25 + 1.0));
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(d[c * 80 + i], 0.5 / raw_norm, 1e-7);
    for (int b = 0; b < 16; ++b) EXPECT_NEAR(d[c * 80 + 64 + b], b == 8 ? 1.0 / raw_norm : 0.0, 1e-7);
  }
}

TEST(FallbackDescriptor, CheckerboardHandComputed) {
  PlanarImage img(3, 8, 8);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) img.at(c, y, x) = static_cast<float>((x + y) % 2);
    }
  }
  const auto d = fallback_descriptor(img);
  const double norm = std::sqrt(3 * (32.0 + 0.25 + 0.25));
  ASSERT_EQ(d.size(), 240u);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(d[c * 80 + i], ((i / 8 + i % 8) % 2) / norm, 1e-7);
    EXPECT_NEAR(d[c * 80 + 64], 0.5 / norm, 1e-7);
    EXPECT_NEAR(d[c * 80 + 79], 0.5 / norm, 1e-7);
  }
}

TEST(FallbackDescriptor, SinglePixelChangeIsVisible) {
  PlanarImage a(3, 16, 16, 0.3f);
  PlanarImage b = a;
  b.at(1, 5, 5) = 0.9f;
  EXPECT_NE(fallback_descriptor(a), fallback_descriptor(b));
}

TEST(EmbedShape, IdenticalViewsEqualSingleEmbedding) {
  std::mt19937_64 rng(2);
  const FallbackBackend backend;
  const DepthImage v = depth_view(rng, 32, ViewId::kFront);
  const auto merged = embed_shape({v, v, v}, backend);
  const auto single = fallback_descriptor(prepare_input(depth_to_planar(v), backend.spec()));
  ASSERT_EQ(merged.size(), single.size());
  for (std::size_t i = 0; i < merged.size(); ++i) EXPECT_EQ(merged[i], static_cast<double>(single[i]));
}

TEST(EmbedShape, ElementwiseMaxAndPermutationInvariance) {
  std::mt19937_64 rng(3);
  const FallbackBackend backend;
  const std::array<DepthImage, 3> v{depth_view(rng, 32, ViewId::kFront), depth_view(rng, 32, ViewId::kSide),
                                    depth_view(rng, 32, ViewId::kTop)};
  const auto merged = embed_shape(v, backend);
  std::vector<double> want(240, -1e9);
  for (const auto& d : v) {
    const auto e = fallback_descriptor(prepare_input(depth_to_planar(d), backend.spec()));
    for (std::size_t i = 0; i < e.size(); ++i) want[i] = std::max(want[i], static_cast<double>(e[i]));
  }
  EXPECT_EQ(merged, want);
  EXPECT_EQ(embed_shape({v[2], v[0], v[1]}, backend), merged);
}

TEST(EmbedShape, BackendFailureIsBackendError) {
  std::mt19937_64 rng(4);
  const StatsBackend bad(fallback_spec(), 7);
  const DepthImage d = depth_view(rng, 16, ViewId::kSide);
  try {
    embed_shape({d, d, d}, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendError);
    EXPECT_NE(std::string(e.what()).find("side"), std::string::npos);
  }
}

TEST(EmbedColor, LengthsAndBlockPermutation) {
  std::mt19937_64 rng(6);
  const ColorImage img = random_view(rng, 32, 12);
  const FallbackBackend fb;
  const std::vector<ColorspaceId> one{ColorspaceId::kRGB};
  EXPECT_EQ(embed_color(img, one, fb).size(), 240u);

  const StatsBackend mobilenet(mobilenet_spec());
  const std::vector<ColorspaceId> four{ColorspaceId::kRGB, ColorspaceId::kHSV, ColorspaceId::kYCbCr,
                                       ColorspaceId::kYUV};
  EXPECT_EQ(embed_color(img, four, mobilenet).size(), 5120u);

  const std::vector<ColorspaceId> rev{four.rbegin(), four.rend()};
  const auto a = embed_color(img, four, fb);
  const auto b = embed_color(img, rev, fb);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < 240; ++i) ASSERT_EQ(a[k * 240 + i], b[(3 - k) * 240 + i]);
  }
}

TEST(Fuse, ExamplesAndErrors) {
  const std::vector<double> fs{1.0, 1.0}, fc{2.0};
  const FeatureVector f = fuse(fs, fc, 0.6);
  ASSERT_EQ(f.values.size(), 3u);
  EXPECT_DOUBLE_EQ(f.values[0], 0.4);
  EXPECT_DOUBLE_EQ(f.values[1], 0.4);
  EXPECT_DOUBLE_EQ(f.values[2], 1.2);
  EXPECT_EQ(f.layout.shape_length, 2u);
  EXPECT_EQ(f.layout.color_length, 1u);

  const FeatureVector zero_color = fuse(fs, fc, 0.0);
  EXPECT_EQ(zero_color.values[2], 0.0);
  EXPECT_EQ(zero_color.values[0], 1.0);
  const FeatureVector zero_shape = fuse(fs, fc, 1.0);
  EXPECT_EQ(zero_shape.values[0], 0.0);
  EXPECT_EQ(zero_shape.values[2], 2.0);

  EXPECT_THROW(fuse({}, {}, 0.5), Error);
  EXPECT_THROW(fuse(fs, fc, 1.5), Error);
  const std::vector<double> nan{std::nan("")};
  EXPECT_THROW(fuse(nan, fc, 0.5), Error);
}

TEST(Fuse, BlockLinearityProperty) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> fs(10), fc(6);
    for (auto& v : fs) v = u(rng);
    for (auto& v : fc) v = u(rng);
    const double a = u(rng), w = std::abs(u(rng)) / 2;
    std::vector<double> afs(fs);
    for (auto& v : afs) v *= a;
    const FeatureVector f = fuse(afs, fc, w);
    for (std::size_t i = 0; i < fs.size(); ++i) ASSERT_NEAR(f.values[i], a * (1 - w) * fs[i], 1e-12);
    for (std::size_t i = 0; i < fc.size(); ++i) ASSERT_NEAR(f.values[10 + i], w * fc[i], 1e-12);
  }
}

TEST(PrepareInput, ResizesAndNormalizes) {
  PlanarImage img(3, 8, 8, 0.5f);
  BackboneSpec spec{"x", 4, 1, {0.25f, 0.5f, 0.0f}, {0.5f, 1.0f, 2.0f}};
  const PlanarImage p = prepare_input(img, spec);
  EXPECT_EQ(p.width, 4);
  EXPECT_FLOAT_EQ(p.at(0, 1, 1), 0.5f);
  EXPECT_FLOAT_EQ(p.at(1, 2, 3), 0.0f);
  EXPECT_FLOAT_EQ(p.at(2, 0, 0), 0.25f);
}

TEST(OnnxBackend, MissingModelIsBackendError) {
  try {
    make_onnx_backend(mobilenet_spec(), "/missing/model.onnx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendError);
  }
}
