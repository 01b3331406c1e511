#include "opencat/cloud_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "opencat/error.hpp"
#include "opencat/keyvalue.hpp"

namespace opencat {
namespace {

struct PcdField {
  std::string name;
  std::size_t size = 4;
  char type = 'F';
  std::size_t count = 1;
  std::size_t offset = 0;  // byte offset in a binary row
  std::size_t column = 0;  // first token index in an ASCII row
};

struct PcdHeader {
  std::vector<PcdField> fields;
  std::size_t width = 0;
  std::size_t height = 1;
  std::optional<std::size_t> points;
  std::string data;
  std::size_t row_bytes = 0;
  std::size_t row_tokens = 0;
  std::size_t data_line = 0;   // line number of the DATA keyword
  std::size_t data_offset = 0; // first byte after the DATA line
};

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t parse_count(const std::string& token, std::size_t line, const char* what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + token + "'");
  }
  return value;
}

PcdHeader parse_header(std::string_view bytes) {
  PcdHeader h;
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  std::vector<char> types;
  std::vector<std::size_t> counts;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    const std::size_t eol = bytes.find('\n', pos);
    const std::string_view line =
        bytes.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
    ++line_no;

    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    const std::string& key = tokens.front();
    const std::vector<std::string> args(tokens.begin() + 1, tokens.end());

    if (key == "VERSION") {
      if (args.size() != 1 || (args[0] != "0.7" && args[0] != ".7")) {
        throw ParseError(line_no, "unsupported PCD version");
      }
    } else if (key == "FIELDS") {
      if (args.empty()) throw ParseError(line_no, "FIELDS is empty");
      names = args;
    } else if (key == "SIZE") {
      sizes.clear();
      for (const auto& a : args) sizes.push_back(parse_count(a, line_no, "SIZE"));
    } else if (key == "TYPE") {
      types.clear();
      for (const auto& a : args) {
        if (a.size() != 1 || (a[0] != 'F' && a[0] != 'I' && a[0] != 'U')) {
          throw ParseError(line_no, "invalid TYPE '" + a + "'");
        }
        types.push_back(a[0]);
      }
    } else if (key == "COUNT") {
      counts.clear();
      for (const auto& a : args) counts.push_back(parse_count(a, line_no, "COUNT"));
    } else if (key == "WIDTH") {
      if (args.size() != 1) throw ParseError(line_no, "WIDTH takes one value");
      h.width = parse_count(args[0], line_no, "WIDTH");
    } else if (key == "HEIGHT") {
      if (args.size() != 1) throw ParseError(line_no, "HEIGHT takes one value");
      h.height = parse_count(args[0], line_no, "HEIGHT");
    } else if (key == "VIEWPOINT") {
      if (args.size() != 7) throw ParseError(line_no, "VIEWPOINT takes seven values");
    } else if (key == "POINTS") {
      if (args.size() != 1) throw ParseError(line_no, "POINTS takes one value");
      h.points = parse_count(args[0], line_no, "POINTS");
    } else if (key == "DATA") {
      if (args.size() != 1) throw ParseError(line_no, "DATA takes one value");
      h.data = args[0];
      h.data_line = line_no;
      h.data_offset = pos;
      break;
    } else {
      throw ParseError(line_no, "unknown header keyword '" + key + "'");
    }
  }

  if (h.data.empty()) throw ParseError(line_no, "missing DATA line");
  if (h.data != "ascii" && h.data != "binary") {
    throw ParseError(h.data_line, "unsupported DATA encoding '" + h.data + "'");
  }
  if (names.empty()) throw ParseError(h.data_line, "missing FIELDS");
  if (counts.empty()) counts.assign(names.size(), 1);
  if (sizes.size() != names.size() || types.size() != names.size() || counts.size() != names.size()) {
    throw ParseError(h.data_line, "FIELDS, SIZE, TYPE and COUNT disagree in length");
  }
  if (!h.points) h.points = h.width * h.height;
  if (h.width * h.height != *h.points) {
    throw ParseError(h.data_line, "WIDTH * HEIGHT does not match POINTS");
  }

  for (std::size_t i = 0; i < names.size(); ++i) {
    PcdField f;
    f.name = names[i];
    f.size = sizes[i];
    f.type = types[i];
    f.count = counts[i];
    const bool ok_size = f.type == 'F' ? (f.size == 4 || f.size == 8)
                                       : (f.size == 1 || f.size == 2 || f.size == 4 || f.size == 8);
    if (!ok_size || f.count == 0) {
      throw ParseError(h.data_line, "invalid SIZE/TYPE/COUNT for field '" + f.name + "'");
    }
    f.offset = h.row_bytes;
    f.column = h.row_tokens;
    h.row_bytes += f.size * f.count;
    h.row_tokens += f.count;
    h.fields.push_back(f);
  }
  return h;
}

const PcdField* find_field(const PcdHeader& h, std::string_view name) {
  for (const auto& f : h.fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

double read_binary_value(const char* p, const PcdField& f) {
  auto load = [p](auto tag) {
    decltype(tag) v;
    std::memcpy(&v, p, sizeof(v));
    return v;
  };
  switch (f.type) {
    case 'F': return f.size == 4 ? double(load(float{})) : load(double{});
    case 'I':
      switch (f.size) {
        case 1: return load(std::int8_t{});
        case 2: return load(std::int16_t{});
        case 4: return load(std::int32_t{});
        default: return double(load(std::int64_t{}));
      }
    default:
      switch (f.size) {
        case 1: return load(std::uint8_t{});
        case 2: return load(std::uint16_t{});
        case 4: return load(std::uint32_t{});
        default: return double(load(std::uint64_t{}));
      }
  }
}

std::uint32_t read_binary_color(const char* p) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, p, 4);
  return bits;
}

double parse_ascii_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ptr != last || (ec != std::errc() && ec != std::errc::result_out_of_range)) {
    throw ParseError(line, "invalid number '" + token + "'");
  }
  return v;
}

std::uint32_t parse_ascii_color(const std::string& token, const PcdField& f, std::size_t line) {
  if (f.type == 'F') {
    float v = 0.0f;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ptr != token.data() + token.size() || (ec != std::errc() && ec != std::errc::result_out_of_range)) {
      throw ParseError(line, "invalid rgb value '" + token + "'");
    }
    return std::bit_cast<std::uint32_t>(v);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid rgb value '" + token + "'");
  }
  return static_cast<std::uint32_t>(v);
}

void append_point(ObjectCloud& cloud, double x, double y, double z, std::optional<std::uint32_t> rgb) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) return;
  Point p{x, y, z};
  if (rgb) {
    p.r = static_cast<std::uint8_t>((*rgb >> 16) & 0xFF);
    p.g = static_cast<std::uint8_t>((*rgb >> 8) & 0xFF);
    p.b = static_cast<std::uint8_t>(*rgb & 0xFF);
  }
  cloud.points.push_back(p);
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void append_number(std::string& out, float v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

float pack_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::uint32_t bits = (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | std::uint32_t{b};
  return std::bit_cast<float>(bits);
}

void unpack_rgb(float packed, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  const auto bits = std::bit_cast<std::uint32_t>(packed);
  r = static_cast<std::uint8_t>((bits >> 16) & 0xFF);
  g = static_cast<std::uint8_t>((bits >> 8) & 0xFF);
  b = static_cast<std::uint8_t>(bits & 0xFF);
}

ObjectCloud parse_pcd(std::string_view bytes) {
  const PcdHeader h = parse_header(bytes);
  const PcdField* fx = find_field(h, "x");
  const PcdField* fy = find_field(h, "y");
  const PcdField* fz = find_field(h, "z");
  if (!fx || !fy || !fz) throw ParseError(h.data_line, "fields x, y and z are required");
  const PcdField* frgb = find_field(h, "rgb");
  if (!frgb) frgb = find_field(h, "rgba");
  if (frgb && (frgb->size != 4 || frgb->type == 'I')) {
    throw ParseError(h.data_line, "packed color field must be F 4 or U 4");
  }

  ObjectCloud cloud;
  const std::size_t expected = *h.points;
  cloud.points.reserve(expected);

  if (h.data == "binary") {
    const std::size_t available = bytes.size() - std::min(bytes.size(), h.data_offset);
    if (available != expected * h.row_bytes) {
      throw ParseError(h.data_line, "binary payload holds " + std::to_string(available) +
                                        " bytes, header declares " + std::to_string(expected) +
                                        " points of " + std::to_string(h.row_bytes) + " bytes");
    }
    const char* row = bytes.data() + h.data_offset;
    for (std::size_t i = 0; i < expected; ++i, row += h.row_bytes) {
      std::optional<std::uint32_t> rgb;
      if (frgb) rgb = read_binary_color(row + frgb->offset);
      append_point(cloud, read_binary_value(row + fx->offset, *fx), read_binary_value(row + fy->offset, *fy),
                   read_binary_value(row + fz->offset, *fz), rgb);
    }
    return cloud;
  }

  std::size_t pos = h.data_offset;
  std::size_t line_no = h.data_line;
  std::size_t rows = 0;
  while (pos < bytes.size()) {
    const std::size_t eol = bytes.find('\n', pos);
    const std::string_view line =
        bytes.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != h.row_tokens) {
      throw ParseError(line_no, "expected " + std::to_string(h.row_tokens) + " values, got " +
                                    std::to_string(tokens.size()));
    }
    ++rows;
    if (rows > expected) break;
    std::optional<std::uint32_t> rgb;
    if (frgb) rgb = parse_ascii_color(tokens[frgb->column], *frgb, line_no);
    append_point(cloud, parse_ascii_double(tokens[fx->column], line_no),
                 parse_ascii_double(tokens[fy->column], line_no),
                 parse_ascii_double(tokens[fz->column], line_no), rgb);
  }
  if (rows != expected) {
    throw ParseError(line_no, "header declares " + std::to_string(expected) + " points but " +
                                  (rows > expected ? "more" : std::to_string(rows)) + " data rows follow");
  }
  return cloud;
}

std::string write_pcd(const ObjectCloud& cloud, PcdEncoding encoding) {
  const std::size_t n = cloud.points.size();
  std::string out;
  out += "# .PCD v0.7 - Point Cloud Data file format\n";
  out += "VERSION 0.7\nFIELDS x y z rgb\nSIZE 8 8 8 4\nTYPE F F F F\nCOUNT 1 1 1 1\n";
  out += "WIDTH " + std::to_string(n) + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n";
  out += "POINTS " + std::to_string(n) + "\n";
  if (encoding == PcdEncoding::kAscii) {
    out += "DATA ascii\n";
    for (const Point& p : cloud.points) {
      append_number(out, p.x);
      out += ' ';
      append_number(out, p.y);
      out += ' ';
      append_number(out, p.z);
      out += ' ';
      append_number(out, pack_rgb(p.r, p.g, p.b));
      out += '\n';
    }
    return out;
  }
  out += "DATA binary\n";
  const std::size_t header = out.size();
  out.resize(header + n * 28);
  char* dst = out.data() + header;
  for (const Point& p : cloud.points) {
    const float rgb = pack_rgb(p.r, p.g, p.b);
    std::memcpy(dst, &p.x, 8);
    std::memcpy(dst + 8, &p.y, 8);
    std::memcpy(dst + 16, &p.z, 8);
    std::memcpy(dst + 24, &rgb, 4);
    dst += 28;
  }
  return out;
}

ObjectCloud parse_csv(std::string_view text) {
  ObjectCloud cloud;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool first_record = true;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        cell += c;
      }
    }
    cells.push_back(cell);
    if (cells.size() == 1 && cells[0].empty()) continue;

    // Tolerate one header row such as "x,y,z,r,g,b".
    if (first_record && !cells[0].empty() && std::isalpha(static_cast<unsigned char>(cells[0][0])) &&
        cells[0] != "nan" && cells[0] != "inf") {
      first_record = false;
      continue;
    }
    first_record = false;
    if (cells.size() != 3 && cells.size() != 6) {
      throw ParseError(line_no, "expected x,y,z or x,y,z,r,g,b");
    }
    Point p{parse_ascii_double(cells[0], line_no), parse_ascii_double(cells[1], line_no),
            parse_ascii_double(cells[2], line_no)};
    if (cells.size() == 6) {
      std::uint8_t* channels[3] = {&p.r, &p.g, &p.b};
      for (int c = 0; c < 3; ++c) {
        const double v = parse_ascii_double(cells[3 + c], line_no);
        if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
          throw ParseError(line_no, "color channel out of [0, 255]: " + cells[3 + c]);
        }
        *channels[c] = static_cast<std::uint8_t>(v);
      }
    }
    if (std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z)) cloud.points.push_back(p);
  }
  return cloud;
}

std::optional<Eigen::Vector3d> read_sidecar_gravity(const std::filesystem::path& sidecar) {
  const KeyValueFile kv = KeyValueFile::read(sidecar);
  const auto g = kv.get_numbers("gravity");
  if (!g) return std::nullopt;
  if (g->size() != 3) throw ParseError(0, sidecar.string() + ": gravity needs three components");
  return normalized_gravity(Eigen::Vector3d((*g)[0], (*g)[1], (*g)[2]));
}

bool is_cloud_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pcd" || ext == ".csv";
}

ObjectCloud read_cloud(const std::filesystem::path& path, const std::optional<Eigen::Vector3d>& gravity_override) {
  if (!is_cloud_file(path)) {
    throw Error(ErrorCode::kIoError, "unsupported cloud file type: " + path.string());
  }
  const std::string bytes = read_file(path);
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  ObjectCloud cloud;
  try {
    cloud = ext == ".pcd" ? parse_pcd(bytes) : parse_csv(bytes);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.reason());
  }
  cloud.source_id = path.stem().string();
  if (gravity_override) {
    cloud.gravity = normalized_gravity(*gravity_override);
  } else {
    const auto sidecar = path.parent_path() / kSidecarName;
    std::error_code ec;
    if (std::filesystem::is_regular_file(sidecar, ec)) {
      if (auto g = read_sidecar_gravity(sidecar)) cloud.gravity = *g;
    }
  }
  return cloud;
}

}  // namespace opencat
