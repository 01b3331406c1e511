#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "opencat/cloud.hpp"
#include "opencat/cloud_io.hpp"

namespace opencat {

/// Procedural object categories with distinct geometry and coloring, used
/// for smoke tests, benchmarks and demos when no real dataset is at hand.
const std::vector<std::string>& synthetic_category_names();

struct SyntheticOptions {
  std::size_t points = 1500;
  double noise = 0.005;  // isotropic position jitter, in object units
};

/// One view of an instance: `instance` fixes size and tint, `view` a random
/// rotation about gravity, a scale, and the sampling noise.
ObjectCloud make_synthetic_object(std::size_t category, std::uint64_t instance, std::uint64_t view,
                                  const SyntheticOptions& options = {});

/// Writes `<root>/<category>/<category>_<i>/<view>.pcd` for the first
/// `categories` synthetic categories and returns the resulting index.
DatasetIndex write_synthetic_dataset(const std::filesystem::path& root, std::size_t categories,
                                     std::size_t instances, std::size_t views_per_instance,
                                     const SyntheticOptions& options = {});

/// Same layout without touching the filesystem: every view gets a unique
/// nonexistent cloud_ref, for agents that never load clouds.
std::vector<DatasetView> synthetic_view_list(std::size_t categories, std::size_t instances,
                                             std::size_t views_per_instance);

}  // namespace opencat
