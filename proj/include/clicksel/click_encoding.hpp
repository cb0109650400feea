#pragma once

#include <span>
#include <string>
#include <vector>

#include "clicksel/image.hpp"

namespace clicksel {

enum class Polarity { negative = 0, positive = 1 };

struct Click {
  int row = 0;
  int col = 0;
  Polarity polarity = Polarity::positive;

  Pixel pixel() const { return {row, col}; }
  bool positive() const { return polarity == Polarity::positive; }

  friend bool operator==(const Click&, const Click&) = default;
};

/// Ordered click history. Positive and negative sets are views over the
/// single sequence, so cross-polarity recency is preserved.
class ClickSet {
 public:
  ClickSet() = default;

  /// Appends unless the same (row, col, polarity) is already present.
  bool add(const Click& click);
  bool add(int row, int col, Polarity polarity) { return add(Click{row, col, polarity}); }
  void pop_back();

  const std::vector<Click>& sequence() const { return clicks_; }
  std::vector<Pixel> positives() const { return select(Polarity::positive); }
  std::vector<Pixel> negatives() const { return select(Polarity::negative); }

  std::size_t size() const { return clicks_.size(); }
  bool empty() const { return clicks_.empty(); }

  /// Throws out_of_bounds if any click lies outside an H×W grid.
  void check_bounds(int height, int width) const;

  friend bool operator==(const ClickSet&, const ClickSet&) = default;

 private:
  std::vector<Pixel> select(Polarity polarity) const;

  std::vector<Click> clicks_;
};

/// Truncation value for distance channels; also the value of an empty source set.
inline constexpr float kDistanceCap = 255.0f;

/// Per-pixel Euclidean distance to the nearest source point, capped at 255.
using DistanceChannel = Grid<float>;

/// Five planes, each in [0,1]: R, G, B, positive distance, negative distance.
struct InteractionTensor {
  static constexpr int kPlanes = 5;

  int height = 0;
  int width = 0;
  int planes = kPlanes;
  std::vector<float> data;  // planar, plane-major

  std::span<const float> plane(int index) const {
    const auto n = static_cast<std::size_t>(height) * width;
    return std::span<const float>(data).subspan(n * index, n);
  }

  friend bool operator==(const InteractionTensor&, const InteractionTensor&) = default;
};

DistanceChannel distance_map(std::span<const Pixel> points, int height, int width);

InteractionTensor encode(const Image& image, const ClickSet& clicks);

}  // namespace clicksel
