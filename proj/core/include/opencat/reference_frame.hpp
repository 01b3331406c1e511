#pragma once

#include <Eigen/Core>

#include "opencat/cloud.hpp"

namespace opencat {

/// Eigenpairs of a symmetric 3x3 matrix, eigenvalues sorted descending.
/// `vectors.col(i)` is the unit eigenvector for `values[i]`.
struct EigenDecomposition {
  Eigen::Vector3d values;
  Eigen::Matrix3d vectors;
  int sweeps = 0;
};

/// Arithmetic mean of the point positions. Throws DegenerateCloud when empty.
Eigen::Vector3d centroid(const ObjectCloud& cloud);

/// Population covariance (normalized by the point count) about `center`.
Eigen::Matrix3d covariance(const ObjectCloud& cloud, const Eigen::Vector3d& center);

/// Cyclic Jacobi eigen-solver for symmetric 3x3 matrices.
///
/// Iterates until the off-diagonal Frobenius norm falls below 1e-12 of the
/// matrix norm (at most 50 sweeps). Each eigenvector is oriented so that its
/// largest-magnitude component is positive. Throws InvalidMatrix when the
/// input is non-finite or its symmetry defect exceeds 1e-12 relative.
EigenDecomposition eigen3_symmetric(const Eigen::Matrix3d& sigma);

struct CovarianceSummary {
  Eigen::Vector3d centroid;
  Eigen::Matrix3d sigma;
  EigenDecomposition eigen;
};

CovarianceSummary summarize_covariance(const ObjectCloud& cloud);

struct LrfDiagnostics {
  /// The dominant eigenvector was within 1e-6 rad of gravity, so the second
  /// one defined the X axis.
  bool used_fallback_axis = false;
  /// X sign came from the third central moment; false means the point-order
  /// tie-break was used because the moment vanished.
  bool sign_from_skewness = true;
  double skewness = 0.0;
};

/// Object-attached right-handed frame: origin at the centroid, Z along
/// gravity, X the horizontal component of the dominant principal axis,
/// Y = Z x X.
struct LocalReferenceFrame {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d y_axis = Eigen::Vector3d::UnitY();
  Eigen::Vector3d z_axis = Eigen::Vector3d::UnitZ();
  LrfDiagnostics diagnostics;

  /// Columns are the axes; maps frame coordinates to world directions.
  Eigen::Matrix3d rotation() const;
};

LocalReferenceFrame construct_lrf(const ObjectCloud& cloud);

/// Maps each point to Rᵀ (p - origin); colors and id are kept, gravity becomes +Z.
ObjectCloud transform_to_lrf(const ObjectCloud& cloud, const LocalReferenceFrame& lrf);

/// Inverse of transform_to_lrf.
ObjectCloud transform_from_lrf(const ObjectCloud& cloud, const LocalReferenceFrame& lrf);

}  // namespace opencat
