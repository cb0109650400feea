#include "clicksel/click_encoding.hpp"

#include <algorithm>
#include <cmath>

#include "clicksel/kernels/edt.hpp"

namespace clicksel {

bool ClickSet::add(const Click& click) {
  if (std::find(clicks_.begin(), clicks_.end(), click) != clicks_.end()) return false;
  clicks_.push_back(click);
  return true;
}

void ClickSet::pop_back() {
  if (clicks_.empty()) fail(ErrorCode::empty_input, "no clicks to remove");
  clicks_.pop_back();
}

void ClickSet::check_bounds(int height, int width) const {
  for (const auto& c : clicks_)
    if (c.row < 0 || c.row >= height || c.col < 0 || c.col >= width)
      fail(ErrorCode::out_of_bounds, "click (" + std::to_string(c.row) + ", " +
                                         std::to_string(c.col) + ") outside " +
                                         std::to_string(height) + "x" + std::to_string(width));
}

std::vector<Pixel> ClickSet::select(Polarity polarity) const {
  std::vector<Pixel> out;
  for (const auto& c : clicks_)
    if (c.polarity == polarity) out.push_back(c.pixel());
  return out;
}

DistanceChannel distance_map(std::span<const Pixel> points, int height, int width) {
  Grid<std::uint8_t> seeds(height, width);
  for (const auto& p : points) {
    if (!seeds.contains(p))
      fail(ErrorCode::out_of_bounds, "distance source (" + std::to_string(p.row) + ", " +
                                         std::to_string(p.col) + ") outside the grid");
    seeds[p] = 1;
  }
  const auto sq = kernels::squared_edt(seeds);
  DistanceChannel out(height, width, kDistanceCap);
  auto dst = out.values();
  const auto src = sq.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == kernels::kNoSeed) continue;
    const double d = std::sqrt(static_cast<double>(src[i]));
    dst[i] = static_cast<float>(std::min(d, static_cast<double>(kDistanceCap)));
  }
  return out;
}

InteractionTensor encode(const Image& image, const ClickSet& clicks) {
  if (image.empty()) fail(ErrorCode::empty_input, "encode: empty image");
  const int h = image.height();
  const int w = image.width();
  clicks.check_bounds(h, w);

  InteractionTensor t;
  t.height = h;
  t.width = w;
  const auto n = static_cast<std::size_t>(h) * w;
  t.data.resize(n * InteractionTensor::kPlanes);
  const auto rgb = image.bytes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < 3; ++ch)
      t.data[ch * n + i] = static_cast<float>(rgb[i * 3 + ch]) / 255.0f;

  const auto pos = clicks.positives();
  const auto neg = clicks.negatives();
  const auto u1 = distance_map(pos, h, w);
  const auto u0 = distance_map(neg, h, w);
  std::transform(u1.values().begin(), u1.values().end(), t.data.begin() + 3 * n,
                 [](float v) { return v / kDistanceCap; });
  std::transform(u0.values().begin(), u0.values().end(), t.data.begin() + 4 * n,
                 [](float v) { return v / kDistanceCap; });
  return t;
}

}  // namespace clicksel
