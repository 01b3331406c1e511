#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "opencat/error.hpp"
#include "opencat/reference_frame.hpp"
#include "test_support.hpp"

using namespace opencat;
using namespace opencat::testing;

namespace {

ObjectCloud box_lattice(double lx, double ly, double lz, int n = 9) {
  ObjectCloud c;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        c.points.push_back(make_point(lx * (i / double(n - 1) - 0.5), ly * (j / double(n - 1) - 0.5),
                                      lz * (k / double(n - 1) - 0.5)));
      }
    }
  }
  return c;
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

void expect_frame_invariants(const LocalReferenceFrame& f, const Eigen::Vector3d& gravity) {
  const Eigen::Matrix3d R = f.rotation();
  EXPECT_LT((R.transpose() * R - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  EXPECT_NEAR(R.determinant(), 1.0, 1e-9);
  EXPECT_LT((f.z_axis - gravity.normalized()).norm(), 1e-9);
}

}  // namespace

TEST(Centroid, Examples) {
  ObjectCloud two;
  two.points = {make_point(0, 0, 0), make_point(2, 0, 0)};
  EXPECT_TRUE(centroid(two).isApprox(Eigen::Vector3d(1, 0, 0)));

  ObjectCloud cube;
  for (int i = 0; i < 8; ++i) cube.points.push_back(make_point(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  EXPECT_TRUE(centroid(cube).isApprox(Eigen::Vector3d(0.5, 0.5, 0.5)));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  ObjectCloud box;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int i = 0; i < 1000; ++i) {
    box.points.push_back(make_point(2 + 4 * u(rng), -1 + 2 * u(rng), 3 + u(rng)));
    sum += box.points.back().position();
  }
  EXPECT_LT((centroid(box) - Eigen::Vector3d(4, 0, 3.5)).norm(), 0.05 * 3);
  EXPECT_LT((centroid(box) - sum / 1000.0).norm(), 1e-12);

  EXPECT_THROW(centroid(ObjectCloud{}), Error);
}

TEST(Eigen3Symmetric, DiagonalAndIdentity) {
  const auto d = eigen3_symmetric(Eigen::Vector3d(1, 3, 2).asDiagonal());
  EXPECT_EQ(d.values, Eigen::Vector3d(3, 2, 1));
  EXPECT_TRUE(d.vectors.col(0).isApprox(Eigen::Vector3d::UnitY()));
  EXPECT_TRUE(d.vectors.col(1).isApprox(Eigen::Vector3d::UnitZ()));
  EXPECT_TRUE(d.vectors.col(2).isApprox(Eigen::Vector3d::UnitX()));

  const auto id = eigen3_symmetric(Eigen::Matrix3d::Identity());
  EXPECT_EQ(id.values, Eigen::Vector3d(1, 1, 1));
  EXPECT_LT((id.vectors.transpose() * id.vectors - Eigen::Matrix3d::Identity()).norm(), 1e-9);
}

TEST(Eigen3Symmetric, RandomMatricesAgainstLibrarySolver) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 500; ++t) {
    const Eigen::Matrix3d a = random_symmetric(rng);
    const auto d = eigen3_symmetric(a);
    const Eigen::Matrix3d recon = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    EXPECT_LT((recon - a).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GE(d.values[0], d.values[1]);
    EXPECT_GE(d.values[1], d.values[2]);
    EXPECT_LT((d.vectors.transpose() * d.vectors - Eigen::Matrix3d::Identity()).norm(), 1e-9);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> oracle(a);
    const Eigen::Vector3d ref = oracle.eigenvalues().reverse();
    EXPECT_LT((ref - d.values).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, a.norm()));
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d r = a * d.vectors.col(i) - d.values[i] * d.vectors.col(i);
      EXPECT_LT(r.norm(), 1e-8 * std::max(1.0, a.norm()));
    }
  }
}

TEST(Eigen3Symmetric, DeterministicAndRejectsAsymmetry) {
  std::mt19937_64 rng(5);
  const Eigen::Matrix3d a = random_symmetric(rng);
  const auto d1 = eigen3_symmetric(a), d2 = eigen3_symmetric(a);
  EXPECT_EQ(d1.values, d2.values);
  EXPECT_EQ(d1.vectors, d2.vectors);

  Eigen::Matrix3d bad = a;
  bad(0, 1) += 1e-3;
  try {
    eigen3_symmetric(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidMatrix);
  }
}

TEST(ConstructLrf, ElongatedBoxAlignsWithX) {
  const ObjectCloud box = box_lattice(4, 1, 1);
  const auto f = construct_lrf(box);
  expect_frame_invariants(f, box.gravity);
  EXPECT_NEAR(std::abs(f.x_axis.x()), 1.0, 1e-9);
  EXPECT_LT(f.origin.norm(), 1e-12);
}

TEST(ConstructLrf, RotationAboutGravityRotatesX) {
  // A skewed elongated cloud so the sign policy decides by the third moment.
  std::mt19937_64 rng(9);
  const ObjectCloud c = random_cloud(rng);
  const auto f0 = construct_lrf(c);
  const double angle = 30.0 * 3.14159265358979323846 / 180.0;
  const auto f1 = construct_lrf(rotated_about_gravity(c, angle, Eigen::Vector3d(0.3, -2, 1)));
  const Eigen::Vector3d expected = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()) * f0.x_axis;
  EXPECT_LT(angle_between(expected, f1.x_axis), 1e-6);
  EXPECT_TRUE(f0.diagnostics.sign_from_skewness);
}

TEST(ConstructLrf, SymmetricCylinderIsDeterministic) {
  ObjectCloud cyl;
  for (int i = 0; i < 64; ++i) {
    for (int k = 0; k < 10; ++k) {
      const double a = 2 * 3.14159265358979323846 * i / 64;
      cyl.points.push_back(make_point(std::cos(a), std::sin(a), 0.3 * k));
    }
  }
  const auto f1 = construct_lrf(cyl), f2 = construct_lrf(cyl);
  EXPECT_EQ(f1.x_axis, f2.x_axis);
  expect_frame_invariants(f1, cyl.gravity);
}

TEST(ConstructLrf, VerticalDominantAxisFallsBackToSecond) {
  const ObjectCloud tall = box_lattice(1.5, 1, 6);
  const auto f = construct_lrf(tall);
  EXPECT_TRUE(f.diagnostics.used_fallback_axis);
  EXPECT_NEAR(std::abs(f.x_axis.x()), 1.0, 1e-9);
  expect_frame_invariants(f, tall.gravity);
}

TEST(ConstructLrf, TiltedGravity) {
  std::mt19937_64 rng(21);
  ObjectCloud c = random_cloud(rng);
  c.gravity = Eigen::Vector3d(0.3, -0.2, 1).normalized();
  expect_frame_invariants(construct_lrf(c), c.gravity);
}

TEST(TransformToLrf, BasisAndRoundTrip) {
  std::mt19937_64 rng(1);
  const ObjectCloud c = rotated_about_gravity(random_cloud(rng), 1.1, Eigen::Vector3d(5, 5, 0));
  const auto f = construct_lrf(c);

  ObjectCloud probe;
  probe.points = {make_point(f.origin.x(), f.origin.y(), f.origin.z())};
  const Eigen::Vector3d px = f.origin + f.x_axis;
  probe.points.push_back(make_point(px.x(), px.y(), px.z()));
  const ObjectCloud mapped = transform_to_lrf(probe, f);
  EXPECT_LT(mapped.points[0].position().norm(), 1e-12);
  EXPECT_LT((mapped.points[1].position() - Eigen::Vector3d(1, 0, 0)).norm(), 1e-12);

  const ObjectCloud in = transform_to_lrf(c, f);
  const ObjectCloud back = transform_from_lrf(in, f);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_LT((back.points[i].position() - c.points[i].position()).norm(), 1e-9);
    EXPECT_EQ(back.points[i].r, c.points[i].r);
  }
  EXPECT_LT(centroid(in).norm(), 1e-9);
}

TEST(TransformToLrf, RigidMotionEquivarianceProperty) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3.14159, 3.14159);
  for (int t = 0; t < 30; ++t) {
    const ObjectCloud c = random_cloud(rng, 400);
    const ObjectCloud a = transform_to_lrf(c, construct_lrf(c));
    const ObjectCloud moved = rotated_about_gravity(c, u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const ObjectCloud b = transform_to_lrf(moved, construct_lrf(moved));
    for (std::size_t i = 0; i < c.size(); ++i) {
      ASSERT_LT((a.points[i].position() - b.points[i].position()).norm(), 1e-6);
    }
  }
}

TEST(TransformToLrf, ScaleCovarianceProperty) {
  std::mt19937_64 rng(78);
  const ObjectCloud c = random_cloud(rng, 300);
  const ObjectCloud a = transform_to_lrf(c, construct_lrf(c));
  const ObjectCloud s = scaled(c, 2.5);
  const auto fs = construct_lrf(s);
  const ObjectCloud b = transform_to_lrf(s, fs);
  EXPECT_LT((fs.x_axis - construct_lrf(c).x_axis).norm(), 1e-12);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_LT((2.5 * a.points[i].position() - b.points[i].position()).norm(), 1e-9);
  }
}
