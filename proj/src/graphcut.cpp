#include "clicksel/graphcut.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "clicksel/maxflow.hpp"

namespace clicksel {

namespace {

constexpr std::array<Offset, 2> kForward4 = {{{0, 1}, {1, 0}}};
constexpr std::array<Offset, 4> kForward8 = {{{0, 1}, {1, -1}, {1, 0}, {1, 1}}};

double squared_contrast(const Image& image, int r0, int c0, int r1, int c1) {
  double sum = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    const double d = static_cast<double>(image.at(r0, c0, ch)) - image.at(r1, c1, ch);
    sum += d * d;
  }
  return sum / 3.0;
}

}  // namespace

void EnergyParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::invalid_argument, "lambda must be a finite value >= 0");
  if (sigma_sq && !(*sigma_sq > 0.0)) fail(ErrorCode::invalid_argument, "sigma^2 must be > 0");
  if (connectivity != 4 && connectivity != 8)
    fail(ErrorCode::invalid_argument, "connectivity must be 4 or 8");
  if (hard_radius < 0) fail(ErrorCode::invalid_argument, "hard radius must be >= 0");
  if (!(prob_clamp > 0.0 && prob_clamp < 0.5))
    fail(ErrorCode::invalid_argument, "probability clamp must lie in (0, 0.5)");
}

std::span<const Offset> forward_offsets(int connectivity) {
  if (connectivity == 4) return kForward4;
  return kForward8;
}

std::span<const Offset> PixelGraph::forward_offsets() const {
  return clicksel::forward_offsets(connectivity);
}

double estimate_sigma_sq(const Image& image, int connectivity) {
  const auto offsets = forward_offsets(connectivity);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c)
      for (const auto& o : offsets) {
        const int r1 = r + o.drow;
        const int c1 = c + o.dcol;
        if (r1 < 0 || r1 >= image.height() || c1 < 0 || c1 >= image.width()) continue;
        sum += squared_contrast(image, r, c, r1, c1);
        ++pairs;
      }
  if (pairs == 0 || sum == 0.0) return 1.0;
  return sum / static_cast<double>(pairs);
}

std::vector<std::int8_t> hard_labels(const ClickSet& clicks, int height, int width, int radius) {
  clicks.check_bounds(height, width);
  std::vector<std::int8_t> hard(static_cast<std::size_t>(height) * width, -1);
  const long long r2 = static_cast<long long>(radius) * radius;
  for (const auto& click : clicks.sequence()) {
    const auto label = static_cast<std::int8_t>(click.positive() ? 1 : 0);
    for (int dr = -radius; dr <= radius; ++dr)
      for (int dc = -radius; dc <= radius; ++dc) {
        if (static_cast<long long>(dr) * dr + static_cast<long long>(dc) * dc > r2) continue;
        const int r = click.row + dr;
        const int c = click.col + dc;
        if (r < 0 || r >= height || c < 0 || c >= width) continue;
        hard[static_cast<std::size_t>(r) * width + c] = label;
      }
  }
  return hard;
}

PixelGraph build_energy(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
                        const EnergyParams& params) {
  params.validate();
  if (!q.same_shape(image.height(), image.width()))
    fail(ErrorCode::dimension_mismatch, "probability map does not match the image size");
  const int h = image.height();
  const int w = image.width();

  PixelGraph g;
  g.height = h;
  g.width = w;
  g.connectivity = params.connectivity;
  g.lambda = params.lambda;
  g.sigma_sq = params.sigma_sq ? *params.sigma_sq : estimate_sigma_sq(image, params.connectivity);
  const auto n = g.pixel_count();
  g.cost_object.resize(n);
  g.cost_background.resize(n);
  g.hard = hard_labels(clicks, h, w, params.hard_radius);

  const auto offsets = g.forward_offsets();
  const auto k = offsets.size();
  g.pairwise.assign(n * k, 0.0);

  bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto i = static_cast<std::size_t>(r) * w + c;
      const double raw = q(r, c);
      if (!std::isfinite(raw)) {
        finite = false;
        continue;
      }
      const double qc = std::clamp(raw, params.prob_clamp, 1.0 - params.prob_clamp);
      g.cost_object[i] = params.lambda * -std::log(qc);
      g.cost_background[i] = params.lambda * -std::log(1.0 - qc);
      for (std::size_t o = 0; o < k; ++o) {
        const int r1 = r + offsets[o].drow;
        const int c1 = c + offsets[o].dcol;
        if (r1 < 0 || r1 >= h || c1 < 0 || c1 >= w) continue;
        const double dist = (offsets[o].drow != 0 && offsets[o].dcol != 0) ? std::sqrt(2.0) : 1.0;
        g.pairwise[i * k + o] =
            std::exp(-squared_contrast(image, r, c, r1, c1) / (2.0 * g.sigma_sq)) / dist;
      }
    }
  }
  if (!finite) fail(ErrorCode::invalid_argument, "probability map contains non-finite values");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += g.cost_object[i] + g.cost_background[i];
  for (const double v : g.pairwise) total += v;
  g.sentinel = 1.0 + total;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.hard[i] == 1) {
      g.cost_object[i] = 0.0;
      g.cost_background[i] = g.sentinel;
    } else if (g.hard[i] == 0) {
      g.cost_object[i] = g.sentinel;
      g.cost_background[i] = 0.0;
    }
  }
  return g;
}

CutResult min_cut(const PixelGraph& graph) {
  const auto start = std::chrono::steady_clock::now();
  const int h = graph.height;
  const int w = graph.width;
  const auto n = graph.pixel_count();
  const auto offsets = graph.forward_offsets();
  const auto k = offsets.size();

  MaxFlow solver(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    solver.add_terminal(static_cast<int>(i), graph.cost_background[i], graph.cost_object[i]);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const auto i = static_cast<std::size_t>(r) * w + c;
      for (std::size_t o = 0; o < k; ++o) {
        const double weight = graph.pairwise[i * k + o];
        if (weight <= 0.0) continue;
        const auto j = static_cast<std::size_t>(r + offsets[o].drow) * w + (c + offsets[o].dcol);
        solver.add_edge(static_cast<int>(i), static_cast<int>(j), weight, weight);
      }
    }

  CutResult result;
  result.flow = solver.solve();
  result.augmentations = solver.augmentations();
  const auto side = solver.source_side();
  result.labeling = BinaryMask(h, w);
  std::copy(side.begin(), side.end(), result.labeling.values().begin());
  result.energy = energy_of(graph, result.labeling);
  result.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double boundary_cost(const PixelGraph& graph, const BinaryMask& labeling) {
  if (!labeling.same_shape(graph.height, graph.width))
    fail(ErrorCode::dimension_mismatch, "labeling does not match the graph size");
  const auto offsets = graph.forward_offsets();
  const auto k = offsets.size();
  double sum = 0.0;
  for (int r = 0; r < graph.height; ++r)
    for (int c = 0; c < graph.width; ++c) {
      const auto i = static_cast<std::size_t>(r) * graph.width + c;
      for (std::size_t o = 0; o < k; ++o) {
        const int r1 = r + offsets[o].drow;
        const int c1 = c + offsets[o].dcol;
        if (r1 < 0 || r1 >= graph.height || c1 < 0 || c1 >= graph.width) continue;
        if (labeling(r, c) != labeling(r1, c1)) sum += graph.pairwise[i * k + o];
      }
    }
  return sum;
}

double energy_of(const PixelGraph& graph, const BinaryMask& labeling) {
  if (!labeling.same_shape(graph.height, graph.width))
    fail(ErrorCode::dimension_mismatch, "labeling does not match the graph size");
  double region = 0.0;
  for (std::size_t i = 0; i < graph.pixel_count(); ++i)
    region += labeling.values()[i] ? graph.cost_object[i] : graph.cost_background[i];
  return region + boundary_cost(graph, labeling);
}

BinaryMask refine(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
                  const EnergyParams& params) {
  return min_cut(build_energy(image, q, clicks, params)).labeling;
}

void dump_graph(const PixelGraph& graph, std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "# clicksel-graph %d %d %d lambda=%.17g sigma_sq=%.17g\n",
                graph.height, graph.width, graph.connectivity, graph.lambda, graph.sigma_sq);
  out << line;
  const auto offsets = graph.forward_offsets();
  const auto k = offsets.size();
  for (std::size_t i = 0; i < graph.pixel_count(); ++i) {
    std::snprintf(line, sizeof line, "t %zu %.17g %.17g\n", i, graph.cost_object[i],
                  graph.cost_background[i]);
    out << line;
  }
  for (int r = 0; r < graph.height; ++r)
    for (int c = 0; c < graph.width; ++c) {
      const auto i = static_cast<std::size_t>(r) * graph.width + c;
      for (std::size_t o = 0; o < k; ++o) {
        const int r1 = r + offsets[o].drow;
        const int c1 = c + offsets[o].dcol;
        if (r1 < 0 || r1 >= graph.height || c1 < 0 || c1 >= graph.width) continue;
        std::snprintf(line, sizeof line, "n %zu %zu %.17g\n", i,
                      static_cast<std::size_t>(r1) * graph.width + c1, graph.pairwise[i * k + o]);
        out << line;
      }
    }
}

}  // namespace clicksel
