#include "clicksel/image.hpp"

#include <algorithm>

namespace clicksel {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::missing_file: return "missing file";
    case ErrorCode::unsupported_format: return "unsupported format";
    case ErrorCode::corrupt_data: return "corrupt data";
    case ErrorCode::io_failure: return "i/o failure";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::out_of_bounds: return "out of bounds";
    case ErrorCode::empty_input: return "empty input";
    case ErrorCode::overlapping_instances: return "overlapping instances";
    case ErrorCode::no_mislabeled_pixels: return "no mislabeled pixels";
  }
  return "unknown error";
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(values().begin(), values().end(), [](std::uint8_t v) { return v != 0; }));
}

std::vector<Pixel> BinaryMask::pixels() const {
  std::vector<Pixel> out;
  for (int r = 0; r < height(); ++r)
    for (int c = 0; c < width(); ++c)
      if (test(r, c)) out.push_back({r, c});
  return out;
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out(height(), width());
  std::transform(values().begin(), values().end(), out.values().begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v == 0); });
  return out;
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op) {
  if (!a.same_shape(b)) fail(ErrorCode::dimension_mismatch, "mask dimensions differ");
  BinaryMask out(a.height(), a.width());
  std::transform(a.values().begin(), a.values().end(), b.values().begin(),
                 out.values().begin(), [&](std::uint8_t x, std::uint8_t y) {
                   return static_cast<std::uint8_t>(op(x != 0, y != 0));
                 });
  return out;
}

}  // namespace

BinaryMask BinaryMask::operator&(const BinaryMask& other) const {
  return combine(*this, other, [](bool x, bool y) { return x && y; });
}

BinaryMask BinaryMask::operator|(const BinaryMask& other) const {
  return combine(*this, other, [](bool x, bool y) { return x || y; });
}

BinaryMask ProbabilityMap::threshold(float level) const {
  BinaryMask out(height(), width());
  std::transform(values().begin(), values().end(), out.values().begin(),
                 [level](float q) { return static_cast<std::uint8_t>(q > level); });
  return out;
}

Image::Image(int height, int width) : Image(height, width, {}) {}

Image::Image(int height, int width, std::vector<std::uint8_t> rgb)
    : height_(height), width_(width), data_(std::move(rgb)) {
  if (height < 0 || width < 0) fail(ErrorCode::invalid_argument, "negative image size");
  const auto expected = static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3;
  if (data_.empty()) data_.assign(expected, 0);
  if (data_.size() != expected)
    fail(ErrorCode::dimension_mismatch, "rgb buffer does not match image size");
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) fail(ErrorCode::dimension_mismatch, "iou: mask dimensions differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const bool x = av[i] != 0;
    const bool y = bv[i] != 0;
    inter += static_cast<std::size_t>(x && y);
    uni += static_cast<std::size_t>(x || y);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Image flip_horizontal(const Image& image) {
  Image out(image.height(), image.width());
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c)
      for (int ch = 0; ch < 3; ++ch)
        out.at(r, image.width() - 1 - c, ch) = image.at(r, c, ch);
  return out;
}

BinaryMask flip_horizontal(const BinaryMask& mask) {
  BinaryMask out(mask.height(), mask.width());
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      out(r, mask.width() - 1 - c) = mask(r, c);
  return out;
}

}  // namespace clicksel
