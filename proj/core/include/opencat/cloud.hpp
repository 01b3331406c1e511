#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace opencat {

/// One colored point. Coordinates in meters, channels 0..255.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::uint8_t r = 128;
  std::uint8_t g = 128;
  std::uint8_t b = 128;

  Eigen::Vector3d position() const { return {x, y, z}; }

  friend bool operator==(const Point&, const Point&) = default;
};

/// A segmented object: its points, the support-plane normal, and an id.
struct ObjectCloud {
  std::vector<Point> points;
  Eigen::Vector3d gravity = Eigen::Vector3d::UnitZ();
  std::string source_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  friend bool operator==(const ObjectCloud& a, const ObjectCloud& b) {
    return a.points == b.points && a.gravity == b.gravity && a.source_id == b.source_id;
  }
};

/// Throws DegenerateCloud unless the cloud has at least four points with
/// finite coordinates spanning at least a plane, and a unit gravity vector.
void validate_cloud(const ObjectCloud& cloud);

/// Returns `g` normalized; throws DegenerateCloud for a zero or non-finite vector.
Eigen::Vector3d normalized_gravity(const Eigen::Vector3d& g);

}  // namespace opencat
