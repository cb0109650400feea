#include "clicksel/image_io.hpp"

#include <png.h>

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>

namespace clicksel {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    fail(ErrorCode::missing_file, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot write: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io_failure, "write failed: " + path.string());
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

namespace {

constexpr std::array<std::uint8_t, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= kPngMagic.size() &&
         std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin());
}

bool is_pnm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

// Decodes PNG into the requested libpng format (RGB or GRAY).
std::vector<std::uint8_t> decode_png(std::span<const std::uint8_t> bytes, png_uint_32 format,
                                     int& height, int& width) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::corrupt_data, "png decode: " + msg);
  }
  img.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::corrupt_data, "png decode: " + msg);
  }
  height = static_cast<int>(img.height);
  width = static_cast<int>(img.width);
  png_image_free(&img);
  return buffer;
}

std::vector<std::uint8_t> encode_png_raw(const std::uint8_t* data, int height, int width,
                                         png_uint_32 format) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, data, 0, nullptr))
    fail(ErrorCode::io_failure, std::string("png encode: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, data, 0, nullptr))
    fail(ErrorCode::io_failure, std::string("png encode: ") + img.message);
  out.resize(size);
  return out;
}

// Minimal binary PNM reader (P5/P6, maxval 255).
struct PnmReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 2;

  void skip_space() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int number() {
    skip_space();
    const auto* first = reinterpret_cast<const char*>(bytes.data() + pos);
    const auto* last = reinterpret_cast<const char*>(bytes.data() + bytes.size());
    int value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || value <= 0) fail(ErrorCode::corrupt_data, "pnm: bad header");
    pos += static_cast<std::size_t>(ptr - first);
    return value;
  }
};

std::vector<std::uint8_t> decode_pnm(std::span<const std::uint8_t> bytes, int channels_out,
                                     int& height, int& width) {
  PnmReader reader{bytes};
  const int channels_in = bytes[1] == '6' ? 3 : 1;
  width = reader.number();
  height = reader.number();
  const int maxval = reader.number();
  if (maxval != 255) fail(ErrorCode::unsupported_format, "pnm: only maxval 255 supported");
  ++reader.pos;  // single whitespace after maxval
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (reader.pos + n * channels_in > bytes.size())
    fail(ErrorCode::corrupt_data, "pnm: truncated pixel data");
  const auto* src = bytes.data() + reader.pos;
  std::vector<std::uint8_t> out(n * static_cast<std::size_t>(channels_out));
  for (std::size_t i = 0; i < n; ++i) {
    if (channels_in == channels_out) {
      for (int c = 0; c < channels_in; ++c) out[i * channels_out + c] = src[i * channels_in + c];
    } else if (channels_out == 3) {
      out[i * 3] = out[i * 3 + 1] = out[i * 3 + 2] = src[i];
    } else {
      const int sum = src[i * 3] + src[i * 3 + 1] + src[i * 3 + 2];
      out[i] = static_cast<std::uint8_t>((sum + 1) / 3);
    }
  }
  return out;
}

std::vector<std::uint8_t> decode_any(std::span<const std::uint8_t> bytes, int channels,
                                     int& height, int& width) {
  if (is_png(bytes))
    return decode_png(bytes, channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY, height, width);
  if (is_pnm(bytes)) return decode_pnm(bytes, channels, height, width);
  fail(ErrorCode::unsupported_format, "unrecognized raster format");
}

std::vector<std::uint8_t> load_bytes_for_decode(const fs::path& path) {
  auto bytes = read_file(path);
  // A file claiming to be PNG by name but lacking the signature is corrupt, not foreign.
  if (path.extension() == ".png" && !is_png(bytes))
    fail(ErrorCode::corrupt_data, "not a valid PNG stream: " + path.string());
  return bytes;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  int h = 0;
  int w = 0;
  auto rgb = decode_any(bytes, 3, h, w);
  return Image(h, w, std::move(rgb));
}

Image load_image(const fs::path& path) { return decode_image(load_bytes_for_decode(path)); }

std::vector<std::uint8_t> encode_png(const Image& image) {
  return encode_png_raw(image.bytes().data(), image.height(), image.width(), PNG_FORMAT_RGB);
}

void save_image(const Image& image, const fs::path& path) {
  write_file(path, encode_png(image));
}

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
  int h = 0;
  int w = 0;
  auto gray = decode_any(bytes, 1, h, w);
  BinaryMask mask(h, w);
  auto out = mask.values();
  for (std::size_t i = 0; i < gray.size(); ++i) {
    if (gray[i] != 0 && gray[i] != 255)
      fail(ErrorCode::corrupt_data, "mask contains non-binary value " + std::to_string(gray[i]));
    out[i] = gray[i] == 255 ? 1 : 0;
  }
  return mask;
}

BinaryMask load_mask(const fs::path& path) { return decode_mask(load_bytes_for_decode(path)); }

std::vector<std::uint8_t> encode_png(const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.size());
  std::transform(mask.values().begin(), mask.values().end(), gray.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
  return encode_png_raw(gray.data(), mask.height(), mask.width(), PNG_FORMAT_GRAY);
}

void save_mask(const BinaryMask& mask, const fs::path& path) {
  write_file(path, encode_png(mask));
}

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int sextet(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorCode::corrupt_data, "base64: length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int s = sextet(c);
      if (s < 0 || pad > 0) fail(ErrorCode::corrupt_data, "base64: invalid character");
      v = (v << 6) | static_cast<std::uint32_t>(s);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace clicksel
