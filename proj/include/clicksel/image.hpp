#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clicksel/error.hpp"

namespace clicksel {

struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// Row-major H×W raster of scalar values.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(checked_area(height, width)), fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool contains(Pixel p) const { return contains(p.row, p.col); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](Pixel p) { return (*this)(p.row, p.col); }
  const T& operator[](Pixel p) const { return (*this)(p.row, p.col); }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(int height, int width) const {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return same_shape(other.height(), other.width());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static long long checked_area(int height, int width) {
    if (height < 0 || width < 0) fail(ErrorCode::invalid_argument, "negative grid size");
    return static_cast<long long>(height) * width;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

/// Binary labeling: 1 = object, 0 = background.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;

  bool test(int row, int col) const { return (*this)(row, col) != 0; }
  bool test(Pixel p) const { return test(p.row, p.col); }
  std::size_t count() const;
  std::vector<Pixel> pixels() const;

  BinaryMask complement() const;
  BinaryMask operator&(const BinaryMask& other) const;
  BinaryMask operator|(const BinaryMask& other) const;
};

/// Per-pixel object probability q in [0,1].
class ProbabilityMap : public Grid<float> {
 public:
  using Grid::Grid;

  /// Pixelwise q > threshold.
  BinaryMask threshold(float level = 0.5f) const;
};

/// 8-bit RGB raster, channels interleaved per pixel.
class Image {
 public:
  Image() = default;
  Image(int height, int width);
  Image(int height, int width, std::vector<std::uint8_t> rgb);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return height_ == 0 || width_ == 0; }

  std::uint8_t& at(int row, int col, int channel) {
    return data_[offset(row, col) + static_cast<std::size_t>(channel)];
  }
  std::uint8_t at(int row, int col, int channel) const {
    return data_[offset(row, col) + static_cast<std::size_t>(channel)];
  }

  std::span<std::uint8_t> bytes() { return data_; }
  std::span<const std::uint8_t> bytes() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) * 3;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Intersection over union of object pixels. Two empty masks score 1.
double iou(const BinaryMask& a, const BinaryMask& b);

Image flip_horizontal(const Image& image);
BinaryMask flip_horizontal(const BinaryMask& mask);

}  // namespace clicksel
