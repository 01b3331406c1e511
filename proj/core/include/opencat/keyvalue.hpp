#pragma once

// Minimal reader for the flat `key = value` text files used for sidecar
// metadata and pipeline configuration. Values are quoted strings, numbers,
// booleans, or one-line arrays of those. `#` starts a comment.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace opencat {

class KeyValueFile {
 public:
  using Scalar = std::variant<std::string, double, bool>;
  struct Value {
    std::vector<Scalar> items;
    bool is_array = false;
  };

  static KeyValueFile parse(std::string_view text);
  static KeyValueFile read(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys() const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_numbers(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

 private:
  std::map<std::string, Value> values_;
  std::map<std::string, std::size_t> lines_;
};

}  // namespace opencat
