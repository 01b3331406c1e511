#include <gtest/gtest.h>

#include "opencat/error.hpp"
#include "opencat/pipeline.hpp"
#include "opencat/projection.hpp"
#include "opencat/reference_frame.hpp"
#include "test_support.hpp"

using namespace opencat;
using namespace opencat::testing;

namespace {

ObjectCloud unit_cube() {
  ObjectCloud c;
  for (int i = 0; i < 8; ++i) c.points.push_back(make_point((i & 1) - 0.5, ((i >> 1) & 1) - 0.5, ((i >> 2) & 1) - 0.5));
  return c;
}

void expect_image_invariants(const ViewTriplet& t, int res) {
  for (ViewId v : kAllViews) {
    const auto& d = t.depth_of(v);
    const auto& c = t.color_of(v);
    ASSERT_EQ(d.width, res);
    ASSERT_EQ(d.height, res);
    ASSERT_EQ(c.width, res);
    EXPECT_GT(d.foreground_count(), 0u);
    for (std::size_t i = 0; i < d.pixels.size(); ++i) {
      const bool fg = c.mask[i] != 0;
      EXPECT_EQ(fg, d.pixels[i] > 0.0f);
      if (fg) {
        EXPECT_LE(d.pixels[i], 1.0f);
      } else {
        EXPECT_EQ(c.pixels[i], (Rgb8{0, 0, 0}));
      }
    }
  }
}

}  // namespace

TEST(FitBounds, UnitCubeWithMargin) {
  const RenderVolume v = fit_bounds(unit_cube(), 0.1);
  EXPECT_DOUBLE_EQ(v.edge, 1.2);
}

TEST(FitBounds, PlanarCloudUsesLargestAxis) {
  ObjectCloud c;
  for (int i = 0; i < 5; ++i) c.points.push_back(make_point(i - 2.0, 0.5 * i - 1.0, 0.0));
  EXPECT_DOUBLE_EQ(fit_bounds(c, 0.0).edge, 4.0);
}

TEST(FitBounds, ZeroExtentIsDegenerate) {
  ObjectCloud c;
  c.points.assign(4, make_point(0, 0, 0));
  try {
    fit_bounds(c, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCloud);
  }
}

TEST(RenderViews, SinglePointAtCenter) {
  ObjectCloud c;
  c.points = {make_point(0, 0, 0, 10, 20, 30)};
  const ViewTriplet t = render_views(c, RenderVolume{1.0, 0.0}, 16, 1);
  for (ViewId v : kAllViews) {
    const auto& d = t.depth_of(v);
    EXPECT_EQ(d.foreground_count(), 9u);
    for (int r = 7; r <= 9; ++r) {
      for (int col = 7; col <= 9; ++col) {
        EXPECT_EQ(d.at(r, col), 1.0f);
        EXPECT_EQ(t.color_of(v).at(r, col), (Rgb8{10, 20, 30}));
      }
    }
  }
}

TEST(RenderViews, TwoPointsOnFrontAxis) {
  ObjectCloud c;
  c.points = {make_point(0.2, 0, 0, 255, 0, 0), make_point(-0.2, 0, 0, 0, 0, 255)};
  const ViewTriplet t = render_views(c, RenderVolume{1.0, 0.0}, 20, 0);
  const auto& front = t.color_of(ViewId::kFront);
  EXPECT_EQ(front.foreground_count(), 1u);
  EXPECT_EQ(front.at(10, 10), (Rgb8{255, 0, 0}));  // larger x is nearer the front camera

  // Side view: right is -X, so x = 0.2 lands left of center.
  const auto& side = t.color_of(ViewId::kSide);
  EXPECT_EQ(side.foreground_count(), 2u);
  EXPECT_EQ(side.at(10, 6), (Rgb8{255, 0, 0}));
  EXPECT_EQ(side.at(10, 14), (Rgb8{0, 0, 255}));
}

TEST(RenderViews, ZBufferKeepsNearestPoint) {
  ObjectCloud c;
  c.points = {make_point(0, 0, -0.3, 1, 1, 1), make_point(0, 0, 0.3, 2, 2, 2), make_point(0, 0, 0.1, 3, 3, 3)};
  const ViewTriplet t = render_views(c, RenderVolume{1.0, 0.0}, 16, 0);
  // Top looks down -Z: the highest point wins.
  EXPECT_EQ(t.color_of(ViewId::kTop).at(8, 8), (Rgb8{2, 2, 2}));
  EXPECT_EQ(t.depth_of(ViewId::kTop).at(8, 8), 1.0f);
}

TEST(RenderViews, MirroredCloudGivesReflectedImage) {
  std::mt19937_64 rng(4);
  const ObjectCloud c = random_cloud(rng, 300);
  ObjectCloud m = c;
  for (auto& p : m.points) p.y = -p.y;
  const RenderVolume vol{2.0, 0.0};
  const int res = 64;
  const ViewTriplet a = render_views(c, vol, res, 1);
  const ViewTriplet b = render_views(m, vol, res, 1);
  const auto& da = a.depth_of(ViewId::kFront);
  const auto& db = b.depth_of(ViewId::kFront);
  for (int r = 0; r < res; ++r) {
    for (int col = 0; col < res; ++col) ASSERT_EQ(da.at(r, col), db.at(r, res - 1 - col));
  }
}

TEST(RenderViews, ResolutionBelowMinimumRejected) {
  EXPECT_THROW(render_views(unit_cube(), RenderVolume{1.2, 0.1}, 8, 1), Error);
}

TEST(RenderViews, ImageInvariantsOnRandomClouds) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5; ++i) {
    const ObjectCloud c = random_cloud(rng, 500);
    RenderOptions opts;
    opts.resolution = 64;
    expect_image_invariants(render_object(c, opts), 64);
  }
}

TEST(RenderViews, UniformScalingIsBitIdentical) {
  std::mt19937_64 rng(12);
  const ObjectCloud c = random_cloud(rng, 600);
  RenderOptions opts;
  opts.resolution = 96;
  const ViewTriplet a = render_object(c, opts);
  const ViewTriplet b = render_object(scaled(c, 5.0), opts);
  EXPECT_DOUBLE_EQ(b.bounds.edge, 5.0 * a.bounds.edge);
  for (ViewId v : kAllViews) {
    EXPECT_EQ(a.depth_of(v), b.depth_of(v));
    EXPECT_EQ(a.color_of(v), b.color_of(v));
  }
}

TEST(RenderViews, RotationAboutGravityBarelyChangesDepth) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  for (int i = 0; i < 5; ++i) {
    const ObjectCloud c = random_cloud(rng, 1500);
    RenderOptions opts;
    opts.resolution = 64;
    const ViewTriplet a = render_object(c, opts);
    const ViewTriplet b = render_object(rotated_about_gravity(c, angle(rng), Eigen::Vector3d(1, 2, 0)), opts);
    for (ViewId v : kAllViews) EXPECT_LE(mean_abs_difference(a.depth_of(v), b.depth_of(v)), 0.02);
  }
}
