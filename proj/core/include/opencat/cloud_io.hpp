#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opencat/cloud.hpp"

namespace opencat {

enum class PcdEncoding { kAscii, kBinary };

/// Parses a PCD v0.7 file (ASCII or little-endian binary). Requires x, y, z;
/// an optional packed `rgb`/`rgba` field supplies color, otherwise points are
/// mid-gray. Rows with non-finite coordinates are dropped. The result is not
/// validated; call validate_cloud() before geometry work.
ObjectCloud parse_pcd(std::string_view bytes);

/// Serializes x, y, z as 8-byte floats and color as packed float `rgb`, so
/// parse_pcd(write_pcd(c)) reproduces the points exactly.
std::string write_pcd(const ObjectCloud& cloud, PcdEncoding encoding);

/// Fallback ingest: one `x,y,z[,r,g,b]` record per line, `#` comments allowed.
ObjectCloud parse_csv(std::string_view text);

/// Reads a `.pcd` or `.csv` cloud. The gravity hint comes from, in order:
/// `gravity_override`, a `meta.toml` sidecar next to the file, or +Z.
/// source_id is the file stem.
ObjectCloud read_cloud(const std::filesystem::path& path,
                       const std::optional<Eigen::Vector3d>& gravity_override = std::nullopt);

/// Reads `gravity = [x, y, z]` from a sidecar file; nullopt if the key is absent.
std::optional<Eigen::Vector3d> read_sidecar_gravity(const std::filesystem::path& sidecar);

inline constexpr std::string_view kSidecarName = "meta.toml";

/// Packs 8-bit channels into the float bit pattern PCL uses for `rgb`.
float pack_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b);
void unpack_rgb(float packed, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

// ---------------------------------------------------------------------------
// Dataset directory layout: <root>/<category>/<category>_<instance>/<view files>

struct DatasetView {
  std::string category_label;
  std::string instance_id;
  std::string view_id;
  std::filesystem::path cloud_ref;

  friend bool operator==(const DatasetView&, const DatasetView&) = default;
};

struct DatasetIndex {
  std::vector<DatasetView> views;
  std::vector<std::string> warnings;

  std::vector<std::string> categories() const;
};

/// Enumerates the dataset deterministically (sorted by category, instance,
/// view). Categories without readable views are dropped with a warning.
/// Throws IoError for an unreadable root and EmptyDataset when nothing is found.
DatasetIndex load_dataset_index(const std::filesystem::path& root);

bool is_cloud_file(const std::filesystem::path& path);

}  // namespace opencat
