#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opencat/image.hpp"

namespace opencat {

using Bytes = std::vector<std::uint8_t>;

/// 16-bit grayscale PNG; depth d maps to round(d * 65535).
Bytes encode_depth_png(const DepthImage& img);
/// 8-bit RGB PNG of the color channels (mask not stored).
Bytes encode_color_png(const ColorImage& img);
Bytes encode_rgb8_png(int width, int height, std::span<const std::uint8_t> interleaved_rgb);

/// Decodes any PNG to 8-bit RGB. Pixels with zero alpha are background;
/// without an alpha channel every pixel is foreground.
ColorImage decode_color_png(std::span<const std::uint8_t> bytes);
/// Decodes a 16-bit grayscale PNG back into a depth image.
DepthImage decode_depth_png(std::span<const std::uint8_t> bytes);

Bytes read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Standard alphabet, padding optional, whitespace ignored. Throws ParseError.
Bytes base64_decode(std::string_view text);

}  // namespace opencat
