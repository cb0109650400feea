#include "clicksel/kernels/edt.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace clicksel::kernels {

int max_threads() { return omp_get_max_threads(); }

void set_threads(int count) {
  if (count > 0) omp_set_num_threads(count);
}

namespace {

// Floor division for a possibly negative numerator and positive denominator.
std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && (num < 0)) --q;
  return q;
}

}  // namespace

Grid<std::int64_t> squared_edt(const Grid<std::uint8_t>& seeds, Exec exec) {
  const int h = seeds.height();
  const int w = seeds.width();
  Grid<std::int64_t> out(h, w, kNoSeed);
  if (h == 0 || w == 0) return out;
  if (std::none_of(seeds.values().begin(), seeds.values().end(),
                   [](std::uint8_t v) { return v != 0; }))
    return out;

  const bool parallel = exec == Exec::parallel;
  // Larger than any in-grid distance, so a seedless column never wins the envelope.
  const std::int64_t inf = static_cast<std::int64_t>(h) + w;

  // Pass 1: vertical distance to the nearest seed in the same column.
  Grid<std::int64_t> g(h, w);
#pragma omp parallel for schedule(static) if (parallel)
  for (int x = 0; x < w; ++x) {
    g(0, x) = seeds(0, x) ? 0 : inf;
    for (int y = 1; y < h; ++y) g(y, x) = seeds(y, x) ? 0 : std::min(inf, g(y - 1, x) + 1);
    for (int y = h - 2; y >= 0; --y)
      if (g(y + 1, x) < g(y, x)) g(y, x) = g(y + 1, x) + 1;
  }

  // Pass 2: lower envelope of the parabolas (x - i)^2 + g(i)^2 along each row.
#pragma omp parallel if (parallel)
  {
    std::vector<int> site(static_cast<std::size_t>(w));
    std::vector<std::int64_t> start(static_cast<std::size_t>(w));
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      auto f = [&](std::int64_t x, int i) {
        const std::int64_t gi = g(y, i);
        return (x - i) * (x - i) + gi * gi;
      };
      auto sep = [&](int i, int u) {
        const std::int64_t gi = g(y, i);
        const std::int64_t gu = g(y, u);
        const std::int64_t num =
            static_cast<std::int64_t>(u) * u - static_cast<std::int64_t>(i) * i + gu * gu - gi * gi;
        return floor_div(num, 2 * static_cast<std::int64_t>(u - i));
      };
      int q = 0;
      site[0] = 0;
      start[0] = 0;
      for (int u = 1; u < w; ++u) {
        while (q >= 0 && f(start[q], site[q]) > f(start[q], u)) --q;
        if (q < 0) {
          q = 0;
          site[0] = u;
        } else {
          const std::int64_t s = 1 + sep(site[q], u);
          if (s < w) {
            ++q;
            site[q] = u;
            start[q] = s;
          }
        }
      }
      for (int u = w - 1; u >= 0; --u) {
        out(y, u) = f(u, site[q]);
        if (u == start[q]) --q;
      }
    }
  }
  return out;
}

Grid<std::int64_t> squared_edt_framed(const Grid<std::uint8_t>& seeds, Exec exec) {
  const int h = seeds.height();
  const int w = seeds.width();
  Grid<std::uint8_t> padded(h + 2, w + 2, 1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) padded(r + 1, c + 1) = seeds(r, c) ? 1 : 0;
  const auto full = squared_edt(padded, exec);
  Grid<std::int64_t> out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(r, c) = full(r + 1, c + 1);
  return out;
}

}  // namespace clicksel::kernels
