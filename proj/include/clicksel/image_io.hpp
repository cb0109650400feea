#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clicksel/image.hpp"

namespace clicksel {

// PNG is the canonical format; binary PPM (P6) and PGM (P5) are accepted on read.

Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);
void save_image(const Image& image, const std::filesystem::path& path);

/// Masks are single-channel, 0 = background and 255 = object.
BinaryMask load_mask(const std::filesystem::path& path);
BinaryMask decode_mask(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const BinaryMask& mask);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Strict decoder: rejects bad length, bad characters and misplaced padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace clicksel
