#include "opencat/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>

#include "opencat/error.hpp"

namespace opencat {
namespace {

Bytes write_png(png_image& image, const void* buffer) {
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("PNG encode failed: ") + image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer, 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

Bytes encode_rgb8_png(int width, int height, std::span<const std::uint8_t> interleaved_rgb) {
  if (interleaved_rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::kIoError, "RGB buffer size does not match image dimensions");
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  return write_png(image, interleaved_rgb.data());
}

Bytes encode_color_png(const ColorImage& img) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(img.pixels.size() * 3);
  for (const Rgb8& p : img.pixels) rgb.insert(rgb.end(), p.begin(), p.end());
  return encode_rgb8_png(img.width, img.height, rgb);
}

Bytes encode_depth_png(const DepthImage& img) {
  std::vector<std::uint16_t> gray(img.pixels.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = static_cast<std::uint16_t>(std::lround(std::clamp(img.pixels[i], 0.0f, 1.0f) * 65535.0));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_LINEAR_Y;
  return write_png(image, gray.data());
}

ColorImage decode_color_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kIoError, std::string("PNG decode failed: ") + image.message);
  }
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("PNG decode failed: ") + image.message);
  }
  ColorImage out = ColorImage::blank(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const bool fg = !has_alpha || rgba[4 * i + 3] != 0;
    if (fg) {
      out.pixels[i] = {rgba[4 * i], rgba[4 * i + 1], rgba[4 * i + 2]};
      out.mask[i] = 1;
    }
  }
  return out;
}

DepthImage decode_depth_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kIoError, std::string("PNG decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_LINEAR_Y;
  std::vector<std::uint16_t> gray(image.width * image.height);
  if (!png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("PNG decode failed: ") + image.message);
  }
  DepthImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    out.pixels[i] = static_cast<float>(static_cast<double>(gray[i]) / 65535.0);
  }
  return out;
}

Bytes read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    if (i + 1 < bytes.size()) v |= std::uint32_t{bytes[i + 1]} << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  bool padding = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    int v;
    if (c >= 'A' && c <= 'Z') v = c - 'A';
    else if (c >= 'a' && c <= 'z') v = c - 'a' + 26;
    else if (c >= '0' && c <= '9') v = c - '0' + 52;
    else if (c == '+') v = 62;
    else if (c == '/') v = 63;
    else if (c == '=') {
      padding = true;
      continue;
    } else if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
      continue;
    } else {
      throw ParseError(0, "invalid base64 character at offset " + std::to_string(i));
    }
    if (padding) throw ParseError(0, "base64 data after padding");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  if (bits >= 6) throw ParseError(0, "truncated base64 data");
  return out;
}

}  // namespace opencat
