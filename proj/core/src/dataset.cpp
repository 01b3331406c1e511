#include <algorithm>
#include <set>

#include "opencat/cloud_io.hpp"
#include "opencat/error.hpp"

namespace opencat {
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    std::error_code type_ec;
    const bool is_dir = it->is_directory(type_ec);
    const bool is_file = it->is_regular_file(type_ec);
    if ((directories && is_dir) || (!directories && is_file)) out.push_back(it->path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

}  // namespace

std::vector<std::string> DatasetIndex::categories() const {
  std::set<std::string> labels;
  for (const auto& v : views) labels.insert(v.category_label);
  return {labels.begin(), labels.end()};
}

DatasetIndex load_dataset_index(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kIoError, "dataset root is not a readable directory: " + root.string());
  }
  fs::directory_iterator probe(root, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot read dataset root " + root.string() + ": " + ec.message());

  DatasetIndex index;
  for (const fs::path& category_dir : sorted_entries(root, true)) {
    const std::string category = category_dir.filename().string();
    const std::string prefix = category + "_";
    std::size_t found = 0;
    for (const fs::path& instance_dir : sorted_entries(category_dir, true)) {
      const std::string name = instance_dir.filename().string();
      if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) {
        index.warnings.push_back("skipping '" + instance_dir.string() + "': instance directory must be named " +
                                 prefix + "<instance>");
        continue;
      }
      std::set<std::string> stems;
      for (const fs::path& file : sorted_entries(instance_dir, false)) {
        if (!is_cloud_file(file)) continue;
        if (!stems.insert(file.stem().string()).second) {
          index.warnings.push_back("skipping '" + file.string() + "': duplicate view id");
          continue;
        }
        index.views.push_back({category, name.substr(prefix.size()), file.stem().string(), file});
        ++found;
      }
    }
    if (found == 0) {
      index.warnings.push_back("category '" + category + "' has no readable views; omitted");
    }
  }
  if (index.views.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no views found under " + root.string());
  }
  return index;
}

}  // namespace opencat
