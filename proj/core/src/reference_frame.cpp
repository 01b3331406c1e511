#include "opencat/reference_frame.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Geometry>

#include "opencat/error.hpp"

namespace opencat {
namespace {

constexpr int kMaxSweeps = 50;
constexpr double kConvergence = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kParallelAngle = 1e-6;  // radians
constexpr double kSkewTolerance = 1e-9;

double off_diagonal_norm(const Eigen::Matrix3d& a) {
  return std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
}

// One Jacobi rotation zeroing a(p, q); accumulates the rotation into v.
void rotate(Eigen::Matrix3d& a, Eigen::Matrix3d& v, int p, int q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  for (int k = 0; k < 3; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (int k = 0; k < 3; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

Eigen::Vector3d centroid(const ObjectCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kDegenerateCloud, "centroid of an empty cloud");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const Point& p : cloud.points) sum += p.position();
  return sum / static_cast<double>(cloud.size());
}

Eigen::Matrix3d covariance(const ObjectCloud& cloud, const Eigen::Vector3d& center) {
  if (cloud.empty()) throw Error(ErrorCode::kDegenerateCloud, "covariance of an empty cloud");
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  for (const Point& p : cloud.points) {
    const Eigen::Vector3d d = p.position() - center;
    sigma.noalias() += d * d.transpose();
  }
  sigma /= static_cast<double>(cloud.size());
  // Exact symmetry; the accumulation above already is, but keep it explicit.
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return sigma;
}

EigenDecomposition eigen3_symmetric(const Eigen::Matrix3d& sigma) {
  if (!sigma.allFinite()) throw Error(ErrorCode::kInvalidMatrix, "matrix has non-finite entries");
  const double norm = sigma.norm();
  const double defect = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (defect > kSymmetryTolerance * norm) {
    throw Error(ErrorCode::kInvalidMatrix, "matrix is not symmetric (defect " + std::to_string(defect) + ")");
  }

  Eigen::Matrix3d a = 0.5 * (sigma + sigma.transpose());
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  int sweeps = 0;
  while (sweeps < kMaxSweeps && off_diagonal_norm(a) > kConvergence * norm) {
    rotate(a, v, 0, 1);
    rotate(a, v, 0, 2);
    rotate(a, v, 1, 2);
    ++sweeps;
  }

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&a](int i, int j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.sweeps = sweeps;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a(order[k], order[k]);
    Eigen::Vector3d col = v.col(order[k]).normalized();
    int lead = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(col[i]) > std::abs(col[lead])) lead = i;
    }
    if (col[lead] < 0.0) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

CovarianceSummary summarize_covariance(const ObjectCloud& cloud) {
  CovarianceSummary s;
  s.centroid = centroid(cloud);
  s.sigma = covariance(cloud, s.centroid);
  s.eigen = eigen3_symmetric(s.sigma);
  return s;
}

Eigen::Matrix3d LocalReferenceFrame::rotation() const {
  Eigen::Matrix3d r;
  r.col(0) = x_axis;
  r.col(1) = y_axis;
  r.col(2) = z_axis;
  return r;
}

LocalReferenceFrame construct_lrf(const ObjectCloud& cloud) {
  validate_cloud(cloud);
  const CovarianceSummary summary = summarize_covariance(cloud);

  LocalReferenceFrame lrf;
  lrf.origin = summary.centroid;
  lrf.z_axis = cloud.gravity.normalized();

  auto horizontal = [&lrf](const Eigen::Vector3d& v) { return Eigen::Vector3d(v - v.dot(lrf.z_axis) * lrf.z_axis); };
  Eigen::Vector3d x = horizontal(summary.eigen.vectors.col(0));
  if (x.norm() < std::sin(kParallelAngle)) {
    x = horizontal(summary.eigen.vectors.col(1));
    lrf.diagnostics.used_fallback_axis = true;
  }
  x.normalize();

  // Orient X by the third central moment along it; fall back to the first
  // point (in cloud order) that lies off the YZ plane.
  double m2 = 0.0;
  double m3 = 0.0;
  for (const Point& p : cloud.points) {
    const double t = (p.position() - lrf.origin).dot(x);
    m2 += t * t;
    m3 += t * t * t;
  }
  m2 /= static_cast<double>(cloud.size());
  m3 /= static_cast<double>(cloud.size());
  lrf.diagnostics.skewness = m3;
  if (std::abs(m3) > kSkewTolerance * std::pow(m2, 1.5)) {
    if (m3 < 0.0) x = -x;
  } else {
    lrf.diagnostics.sign_from_skewness = false;
    const double eps = kSkewTolerance * std::sqrt(m2);
    for (const Point& p : cloud.points) {
      const double t = (p.position() - lrf.origin).dot(x);
      if (std::abs(t) > eps) {
        if (t < 0.0) x = -x;
        break;
      }
    }
  }

  lrf.x_axis = x;
  lrf.y_axis = lrf.z_axis.cross(x).normalized();
  return lrf;
}

ObjectCloud transform_to_lrf(const ObjectCloud& cloud, const LocalReferenceFrame& lrf) {
  const Eigen::Matrix3d rt = lrf.rotation().transpose();
  ObjectCloud out = cloud;
  out.gravity = Eigen::Vector3d::UnitZ();
  for (Point& p : out.points) {
    const Eigen::Vector3d q = rt * (p.position() - lrf.origin);
    p.x = q.x();
    p.y = q.y();
    p.z = q.z();
  }
  return out;
}

ObjectCloud transform_from_lrf(const ObjectCloud& cloud, const LocalReferenceFrame& lrf) {
  const Eigen::Matrix3d r = lrf.rotation();
  ObjectCloud out = cloud;
  out.gravity = lrf.z_axis;
  for (Point& p : out.points) {
    const Eigen::Vector3d q = r * p.position() + lrf.origin;
    p.x = q.x();
    p.y = q.y();
    p.z = q.z();
  }
  return out;
}

}  // namespace opencat
