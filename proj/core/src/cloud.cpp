#include "opencat/cloud.hpp"

#include <cmath>

#include "opencat/error.hpp"
#include "opencat/reference_frame.hpp"

namespace opencat {

Eigen::Vector3d normalized_gravity(const Eigen::Vector3d& g) {
  const double n = g.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::kDegenerateCloud, "gravity vector must be finite and non-zero");
  }
  return g / n;
}

void validate_cloud(const ObjectCloud& cloud) {
  if (cloud.points.size() < 4) {
    throw Error(ErrorCode::kDegenerateCloud,
                "cloud '" + cloud.source_id + "' has " + std::to_string(cloud.points.size()) +
                    " points; at least 4 are required");
  }
  for (const Point& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw Error(ErrorCode::kDegenerateCloud, "cloud '" + cloud.source_id + "' has non-finite coordinates");
    }
  }
  if (!cloud.gravity.allFinite() || std::abs(cloud.gravity.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kDegenerateCloud, "gravity of '" + cloud.source_id + "' is not a unit vector");
  }

  const Eigen::Matrix3d sigma = covariance(cloud, centroid(cloud));
  const double trace = sigma.trace();
  if (!(trace > 0.0)) {
    throw Error(ErrorCode::kDegenerateCloud, "cloud '" + cloud.source_id + "' has zero spread");
  }
  const EigenDecomposition eig = eigen3_symmetric(sigma);
  const double tol = 1e-12 * trace;
  if (eig.values[1] <= tol) {
    throw Error(ErrorCode::kDegenerateCloud,
                "cloud '" + cloud.source_id + "' is collinear (covariance rank < 2)");
  }
}

}  // namespace opencat
