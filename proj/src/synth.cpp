#include "clicksel/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "clicksel/click_sampling.hpp"

namespace clicksel {

namespace {

using Color = std::array<double, 3>;

double channel_gap(const Color& a, const Color& b) {
  double gap = 0.0;
  for (int c = 0; c < 3; ++c) gap = std::max(gap, std::abs(a[c] - b[c]));
  return gap;
}

// Bilinearly interpolated lattice noise in [-1, 1].
class SmoothNoise {
 public:
  SmoothNoise(Rng& rng, int cells) : cells_(cells), lattice_((cells + 1) * (cells + 1)) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : lattice_) v = u(rng);
  }

  double at(double y, double x) const {
    const double fy = std::clamp(y, 0.0, 1.0) * cells_;
    const double fx = std::clamp(x, 0.0, 1.0) * cells_;
    const int iy = std::min(static_cast<int>(fy), cells_ - 1);
    const int ix = std::min(static_cast<int>(fx), cells_ - 1);
    const double ty = fy - iy;
    const double tx = fx - ix;
    auto v = [&](int r, int c) { return lattice_[static_cast<std::size_t>(r * (cells_ + 1) + c)]; };
    const double top = v(iy, ix) * (1 - tx) + v(iy, ix + 1) * tx;
    const double bottom = v(iy + 1, ix) * (1 - tx) + v(iy + 1, ix + 1) * tx;
    return top * (1 - ty) + bottom * ty;
  }

 private:
  int cells_;
  std::vector<double> lattice_;
};

BinaryMask draw_shape(Rng& rng, int size) {
  std::uniform_int_distribution<int> kind_dist(0, 2);
  std::uniform_real_distribution<double> center(8.0, size - 9.0);
  std::uniform_real_distribution<double> extent(7.0, 16.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  BinaryMask mask(size, size);
  const int kind = kind_dist(rng);
  const double cy = center(rng);
  const double cx = center(rng);
  if (kind == 0) {
    const double ry = extent(rng);
    const double rx = extent(rng);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        const double dy = (r - cy) / ry;
        const double dx = (c - cx) / rx;
        mask(r, c) = dy * dy + dx * dx <= 1.0;
      }
  } else if (kind == 1) {
    const double hy = extent(rng) * 0.85;
    const double hx = extent(rng) * 0.85;
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c)
        mask(r, c) = std::abs(r - cy) <= hy && std::abs(c - cx) <= hx;
  } else {
    const double radius = extent(rng) * 1.25;
    const double phase = angle(rng);
    std::array<double, 3> vy{};
    std::array<double, 3> vx{};
    for (int k = 0; k < 3; ++k) {
      const double a = phase + k * 2.0 * M_PI / 3.0;
      vy[k] = cy + radius * std::sin(a);
      vx[k] = cx + radius * std::cos(a);
    }
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        bool inside = true;
        for (int k = 0; k < 3; ++k) {
          const int j = (k + 1) % 3;
          const double cross = (vx[j] - vx[k]) * (r - vy[k]) - (vy[j] - vy[k]) * (c - vx[k]);
          inside = inside && cross >= 0.0;
        }
        mask(r, c) = inside;
      }
  }
  return mask;
}

Color random_color(Rng& rng) {
  std::uniform_real_distribution<double> u(40.0, 215.0);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

InstanceScene synth_scene(std::uint64_t seed) {
  Rng rng(seed ^ 0x5eed5ce7e0000000ULL);
  const int size = kSynthSize;

  InstanceScene scene;
  scene.id = "synth_" + std::to_string(seed);

  const Color background = random_color(rng);
  const int wanted = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<Color> colors;
  BinaryMask occupied(size, size);
  for (int attempt = 0; attempt < 200 && static_cast<int>(scene.instances.size()) < wanted;
       ++attempt) {
    auto shape = draw_shape(rng, size);
    // Interior must fit a click at the default margin from the boundary.
    const auto depth = boundary_distance(shape);
    if (*std::max_element(depth.values().begin(), depth.values().end()) < 6.0f) continue;
    // Two-pixel gap from existing shapes keeps instances separable.
    const auto gap = distance_to_set(shape);
    bool clash = false;
    for (std::size_t i = 0; i < occupied.size() && !clash; ++i)
      clash = occupied.values()[i] && gap.values()[i] < 3.0f;
    if (clash) continue;
    Color color = random_color(rng);
    bool distinct = channel_gap(color, background) >= 70.0;
    for (const auto& other : colors) distinct = distinct && channel_gap(color, other) >= 45.0;
    if (!distinct) continue;
    colors.push_back(color);
    occupied = occupied | shape;
    scene.instances.push_back(std::move(shape));
  }
  if (scene.instances.empty()) {
    // Fallback keeps the one-shape minimum: a centered disk in an opposite color.
    BinaryMask disk(size, size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c)
        disk(r, c) = (r - 32) * (r - 32) + (c - 32) * (c - 32) <= 144;
    Color color{};
    for (int c = 0; c < 3; ++c) color[c] = background[c] > 127.5 ? background[c] - 90 : background[c] + 90;
    colors.push_back(color);
    scene.instances.push_back(std::move(disk));
  }

  SmoothNoise bg_noise(rng, 6);
  std::array<SmoothNoise, 3> tint{SmoothNoise(rng, 4), SmoothNoise(rng, 4), SmoothNoise(rng, 4)};
  std::normal_distribution<double> grain(0.0, 4.0);
  scene.image = Image(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const double y = static_cast<double>(r) / (size - 1);
      const double x = static_cast<double>(c) / (size - 1);
      Color base = background;
      double amplitude = 22.0;
      for (std::size_t k = 0; k < scene.instances.size(); ++k)
        if (scene.instances[k].test(r, c)) {
          base = colors[k];
          amplitude = 8.0;
        }
      const double shade = bg_noise.at(y, x);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = base[ch] + amplitude * (0.6 * shade + 0.4 * tint[ch].at(y, x)) + grain(rng);
        scene.image.at(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  return scene;
}

}  // namespace clicksel
