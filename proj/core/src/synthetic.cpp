#include "opencat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "opencat/error.hpp"

namespace opencat {
namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double range(Rng& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }
double gauss(Rng& rng) {
  const double u1 = std::max(unit(rng), 1e-300);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * unit(rng));
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Tint {
  double r, g, b;
};

Point colored(double x, double y, double z, Tint c) {
  Point p;
  p.x = x;
  p.y = y;
  p.z = z;
  p.r = to_byte(c.r);
  p.g = to_byte(c.g);
  p.b = to_byte(c.b);
  return p;
}

// Each sampler draws one surface point in a canonical pose.
Point sample_box(Rng& rng, const Eigen::Vector3d& d, Tint t) {
  const double area[3] = {d.y() * d.z(), d.x() * d.z(), d.x() * d.y()};
  double pick = range(rng, 0.0, area[0] + area[1] + area[2]);
  int face = pick < area[0] ? 0 : (pick < area[0] + area[1] ? 1 : 2);
  Eigen::Vector3d p(range(rng, -0.5, 0.5) * d.x(), range(rng, -0.5, 0.5) * d.y(), range(rng, -0.5, 0.5) * d.z());
  p[face] = (unit(rng) < 0.5 ? -0.5 : 0.5) * d[face];
  const double shade = face == 2 ? 1.0 : (face == 1 ? 0.75 : 0.5);
  return colored(p.x(), p.y(), p.z(), {t.r * shade, t.g * shade, t.b * shade});
}

Point sample_sphere(Rng& rng, const Eigen::Vector3d& d, Tint t) {
  Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
  v.normalize();
  const double shade = 0.75 + 0.25 * v.z();
  return colored(v.x() * d.x() * 0.5, v.y() * d.y() * 0.5, v.z() * d.z() * 0.5,
                 {t.r * shade, t.g * shade, t.b * shade});
}

Point sample_cylinder(Rng& rng, const Eigen::Vector3d& d, Tint t) {
  const double a = range(rng, 0.0, 2.0 * std::numbers::pi);
  const double z = range(rng, -0.5, 0.5) * d.z();
  const bool stripe = static_cast<int>(std::floor((z / d.z() + 0.5) * 6.0)) % 2 == 0;
  const Tint c = stripe ? t : Tint{250.0, 230.0, 40.0};
  return colored(0.5 * d.x() * std::cos(a), 0.5 * d.y() * std::sin(a), z, c);
}

Point sample_cone(Rng& rng, const Eigen::Vector3d& d, Tint t) {
  const double a = range(rng, 0.0, 2.0 * std::numbers::pi);
  const double h = 1.0 - std::sqrt(unit(rng));  // uniform over the lateral surface
  const double rr = 0.5 * (1.0 - h);
  const double shade = 0.6 + 0.4 * h;
  return colored(rr * d.x() * std::cos(a), rr * d.y() * std::sin(a), (h - 0.25) * d.z(),
                 {t.r * shade, t.g * shade, t.b * shade});
}

Point sample_torus(Rng& rng, const Eigen::Vector3d& d, Tint t) {
  const double u = range(rng, 0.0, 2.0 * std::numbers::pi);
  const double v = range(rng, 0.0, 2.0 * std::numbers::pi);
  const double big = 0.35, small = 0.15;
  const double x = (big + small * std::cos(v)) * std::cos(u);
  const double y = (big + small * std::cos(v)) * std::sin(u);
  const double z = small * std::sin(v);
  const bool check = (static_cast<int>(std::floor(u * 8.0 / std::numbers::pi)) +
                      static_cast<int>(std::floor(v * 2.0 / std::numbers::pi))) % 2 == 0;
  const Tint c = check ? t : Tint{245.0, 245.0, 245.0};
  return colored(x * d.x(), y * d.y(), z * d.z() * 2.0, c);
}

Point sample_pyramid(Rng& rng, const Eigen::Vector3d& d, Tint t) {
  // Four triangular sides over a square base, apex on +z.
  const int side = static_cast<int>(unit(rng) * 4.0) & 3;
  double a = unit(rng), b = unit(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  static const double corners[5][2] = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}};
  const Eigen::Vector3d p0(corners[side][0], corners[side][1], -0.3);
  const Eigen::Vector3d p1(corners[side + 1][0], corners[side + 1][1], -0.3);
  const Eigen::Vector3d apex(0.0, 0.0, 0.7);
  const Eigen::Vector3d p = p0 + a * (p1 - p0) + b * (apex - p0);
  const double g = 0.35 + 0.65 * (p.z() + 0.3);
  return colored(p.x() * d.x(), p.y() * d.y(), p.z() * d.z(), {t.r * g, t.g * g, t.b * g});
}

struct CategoryDef {
  const char* name;
  Point (*sample)(Rng&, const Eigen::Vector3d&, Tint);
  Eigen::Vector3d dims;
  Tint tint;
};

const CategoryDef kCategories[] = {
    {"box", sample_box, {1.0, 0.6, 0.35}, {200.0, 40.0, 40.0}},
    {"ball", sample_sphere, {0.8, 0.8, 0.8}, {40.0, 80.0, 210.0}},
    {"can", sample_cylinder, {0.5, 0.5, 1.2}, {30.0, 150.0, 60.0}},
    {"cone", sample_cone, {0.7, 0.7, 1.0}, {240.0, 130.0, 20.0}},
    {"ring", sample_torus, {1.0, 1.0, 1.0}, {130.0, 40.0, 160.0}},
    {"pyramid", sample_pyramid, {0.9, 0.9, 0.8}, {150.0, 150.0, 150.0}},
};
constexpr std::size_t kCategoryCount = std::size(kCategories);

}  // namespace

const std::vector<std::string>& synthetic_category_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : kCategories) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

ObjectCloud make_synthetic_object(std::size_t category, std::uint64_t instance, std::uint64_t view,
                                  const SyntheticOptions& options) {
  if (category >= kCategoryCount) throw Error(ErrorCode::kConfigError, "unknown synthetic category index");
  if (options.points < 4) throw Error(ErrorCode::kConfigError, "a synthetic object needs at least 4 points");
  const CategoryDef& def = kCategories[category];

  Rng inst_rng(0x5eedULL ^ (category * 0x100000001b3ULL) ^ (instance * 0x9e3779b97f4a7c15ULL));
  const Eigen::Vector3d dims = def.dims.cwiseProduct(
      Eigen::Vector3d(range(inst_rng, 0.9, 1.1), range(inst_rng, 0.9, 1.1), range(inst_rng, 0.9, 1.1)));
  const Tint tint{def.tint.r + range(inst_rng, -20.0, 20.0), def.tint.g + range(inst_rng, -20.0, 20.0),
                  def.tint.b + range(inst_rng, -20.0, 20.0)};

  Rng view_rng(inst_rng() ^ (view * 0xd1b54a32d192ed03ULL + 1));
  const double yaw = range(view_rng, 0.0, 2.0 * std::numbers::pi);
  const double scale = range(view_rng, 0.8, 1.25);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d offset(range(view_rng, -1.0, 1.0), range(view_rng, -1.0, 1.0), range(view_rng, 0.0, 1.0));

  ObjectCloud cloud;
  cloud.source_id = std::string(def.name) + "_" + std::to_string(instance) + "_" + std::to_string(view);
  cloud.points.reserve(options.points);
  for (std::size_t i = 0; i < options.points; ++i) {
    Point p = def.sample(view_rng, dims, tint);
    Eigen::Vector3d q(p.x + options.noise * gauss(view_rng), p.y + options.noise * gauss(view_rng),
                      p.z + options.noise * gauss(view_rng));
    q = rot * (scale * q) + offset;
    p.x = q.x();
    p.y = q.y();
    p.z = q.z();
    cloud.points.push_back(p);
  }
  return cloud;
}

DatasetIndex write_synthetic_dataset(const fs::path& root, std::size_t categories, std::size_t instances,
                                     std::size_t views_per_instance, const SyntheticOptions& options) {
  if (categories == 0 || categories > kCategoryCount) {
    throw Error(ErrorCode::kConfigError, "synthetic category count must be between 1 and " +
                                             std::to_string(kCategoryCount));
  }
  if (instances == 0 || views_per_instance == 0) {
    throw Error(ErrorCode::kConfigError, "instances and views per instance must be positive");
  }
  std::error_code ec;
  for (std::size_t c = 0; c < categories; ++c) {
    const std::string name = kCategories[c].name;
    for (std::size_t i = 0; i < instances; ++i) {
      const fs::path dir = root / name / (name + "_" + std::to_string(i + 1));
      fs::create_directories(dir, ec);
      if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
      for (std::size_t v = 0; v < views_per_instance; ++v) {
        const ObjectCloud cloud = make_synthetic_object(c, i, v, options);
        char stem[32];
        std::snprintf(stem, sizeof stem, "view_%03zu.pcd", v + 1);
        const fs::path file = dir / stem;
        std::ofstream out(file, std::ios::binary);
        out << write_pcd(cloud, PcdEncoding::kBinary);
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
      }
    }
  }
  return load_dataset_index(root);
}

std::vector<DatasetView> synthetic_view_list(std::size_t categories, std::size_t instances,
                                             std::size_t views_per_instance) {
  std::vector<DatasetView> out;
  for (std::size_t c = 0; c < categories; ++c) {
    const std::string name = c < kCategoryCount ? kCategories[c].name : "category" + std::to_string(c);
    for (std::size_t i = 0; i < instances; ++i) {
      for (std::size_t v = 0; v < views_per_instance; ++v) {
        const std::string inst = name + "_" + std::to_string(i + 1);
        const std::string view = "view_" + std::to_string(v + 1);
        out.push_back({name, inst, view, fs::path("/nonexistent") / name / inst / (view + ".pcd")});
      }
    }
  }
  return out;
}

}  // namespace opencat
