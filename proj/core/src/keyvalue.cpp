#include "opencat/keyvalue.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "opencat/error.hpp"

namespace opencat {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

KeyValueFile::Scalar parse_scalar(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token.empty()) throw ParseError(line, "empty value");
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') throw ParseError(line, "unterminated string");
    return std::string(token.substr(1, token.size() - 2));
  }
  if (token == "true") return true;
  if (token == "false") return false;
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, "cannot parse value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view rhs = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) {
        throw ParseError(line_no, "invalid key '" + key + "'");
      }
    }
    if (out.values_.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");

    Value value;
    if (!rhs.empty() && rhs.front() == '[') {
      if (rhs.back() != ']') throw ParseError(line_no, "unterminated array");
      value.is_array = true;
      std::string_view body = trim(rhs.substr(1, rhs.size() - 2));
      while (!body.empty()) {
        std::size_t cut = 0;
        bool quoted = false;
        while (cut < body.size() && (quoted || body[cut] != ',')) {
          if (body[cut] == '"') quoted = !quoted;
          ++cut;
        }
        value.items.push_back(parse_scalar(body.substr(0, cut), line_no));
        body = cut < body.size() ? trim(body.substr(cut + 1)) : std::string_view{};
      }
    } else {
      value.items.push_back(parse_scalar(rhs, line_no));
    }
    out.values_.emplace(key, std::move(value));
    out.lines_.emplace(key, line_no);
  }
  return out;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.reason());
  }
}

std::vector<std::string> KeyValueFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.is_array || !std::holds_alternative<std::string>(it->second.items.front())) {
    throw ParseError(lines_.at(key), "'" + key + "' must be a string");
  }
  return std::get<std::string>(it->second.items.front());
}

std::optional<double> KeyValueFile::get_number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.is_array || !std::holds_alternative<double>(it->second.items.front())) {
    throw ParseError(lines_.at(key), "'" + key + "' must be a number");
  }
  return std::get<double>(it->second.items.front());
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.is_array || !std::holds_alternative<bool>(it->second.items.front())) {
    throw ParseError(lines_.at(key), "'" + key + "' must be true or false");
  }
  return std::get<bool>(it->second.items.front());
}

std::optional<std::vector<double>> KeyValueFile::get_numbers(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : it->second.items) {
    if (!std::holds_alternative<double>(item)) {
      throw ParseError(lines_.at(key), "'" + key + "' must be an array of numbers");
    }
    out.push_back(std::get<double>(item));
  }
  return out;
}

std::optional<std::vector<std::string>> KeyValueFile::get_strings(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : it->second.items) {
    if (!std::holds_alternative<std::string>(item)) {
      throw ParseError(lines_.at(key), "'" + key + "' must be an array of strings");
    }
    out.push_back(std::get<std::string>(item));
  }
  return out;
}

}  // namespace opencat
