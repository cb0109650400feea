#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

clicksel::Grid<float> distance_map(const std::vector<Pixel>& sources, int height, int width) {
  clicksel::Grid<float> out(height, width, 255.0f);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      double best = 255.0;
      for (const auto& s : sources) best = std::min(best, std::hypot(double(r - s.row), double(c - s.col)));
      out(r, c) = static_cast<float>(best);
    }
  return out;
}

clicksel::Grid<long long> squared_distance(const BinaryMask& sources) {
  const auto pts = sources.pixels();
  clicksel::Grid<long long> out(sources.height(), sources.width(), -1);
  for (int r = 0; r < sources.height(); ++r)
    for (int c = 0; c < sources.width(); ++c) {
      long long best = -1;
      for (const auto& s : pts) {
        const long long d = sq_dist({r, c}, s);
        if (best < 0 || d < best) best = d;
      }
      out(r, c) = best;
    }
  return out;
}

BinaryMask margin_band(const BinaryMask& object, int d) {
  const auto pts = object.pixels();
  BinaryMask out(object.height(), object.width());
  for (int r = 0; r < object.height(); ++r)
    for (int c = 0; c < object.width(); ++c) {
      if (object(r, c)) continue;
      for (const auto& s : pts)
        if (std::hypot(double(r - s.row), double(c - s.col)) < d) {
          out(r, c) = 1;
          break;
        }
    }
  return out;
}

bool in_disk(Pixel p, Pixel center, int radius) {
  return std::hypot(double(p.row - center.row), double(p.col - center.col)) <= radius + 1e-12;
}

namespace {

struct Neighbor {
  int a, b;
  double dist;
};

std::vector<Neighbor> neighbor_pairs(int h, int w, int connectivity) {
  std::vector<Neighbor> out;
  for (int r0 = 0; r0 < h; ++r0)
    for (int c0 = 0; c0 < w; ++c0)
      for (int r1 = 0; r1 < h; ++r1)
        for (int c1 = 0; c1 < w; ++c1) {
          const int a = r0 * w + c0, b = r1 * w + c1;
          if (b <= a) continue;
          const int dr = std::abs(r0 - r1), dc = std::abs(c0 - c1);
          if (dr > 1 || dc > 1) continue;
          if (connectivity == 4 && dr + dc != 1) continue;
          out.push_back({a, b, std::sqrt(double(dr * dr + dc * dc))});
        }
  return out;
}

double contrast(const Image& image, int a, int b) {
  const int w = image.width();
  double s = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    const double d = double(image.at(a / w, a % w, ch)) - double(image.at(b / w, b % w, ch));
    s += d * d;
  }
  return s / 3.0;
}

std::vector<int> hard_map(const ClickSet& clicks, int h, int w, int radius) {
  std::vector<int> hard(static_cast<std::size_t>(h * w), -1);
  for (const auto& click : clicks.sequence())
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (in_disk({r, c}, click.pixel(), radius)) hard[static_cast<std::size_t>(r * w + c)] = click.positive();
  return hard;
}

struct Terms {
  std::vector<double> cost_obj, cost_bg;
  std::vector<int> hard;
  std::vector<Neighbor> pairs;
  std::vector<double> weight;
};

Terms terms(const Image& image, const ProbabilityMap& q, const ClickSet& clicks, const EnergySetup& s) {
  const int h = image.height(), w = image.width();
  Terms t;
  t.hard = hard_map(clicks, h, w, s.hard_radius);
  for (int i = 0; i < h * w; ++i) {
    const double qc = std::clamp(double(q.values()[static_cast<std::size_t>(i)]), s.prob_clamp, 1.0 - s.prob_clamp);
    t.cost_obj.push_back(s.lambda * -std::log(qc));
    t.cost_bg.push_back(s.lambda * -std::log(1.0 - qc));
  }
  t.pairs = neighbor_pairs(h, w, s.connectivity);
  for (const auto& p : t.pairs)
    t.weight.push_back(s.zero_pairwise ? 0.0 : std::exp(-contrast(image, p.a, p.b) / (2.0 * s.sigma_sq)) / p.dist);
  return t;
}

double evaluate(const Terms& t, const std::vector<int>& label) {
  double e = 0.0;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (t.hard[i] >= 0) {
      if (label[i] != t.hard[i]) return std::numeric_limits<double>::infinity();
      continue;
    }
    e += label[i] ? t.cost_obj[i] : t.cost_bg[i];
  }
  for (std::size_t k = 0; k < t.pairs.size(); ++k)
    if (label[static_cast<std::size_t>(t.pairs[k].a)] != label[static_cast<std::size_t>(t.pairs[k].b)]) e += t.weight[k];
  return e;
}

}  // namespace

double sigma_sq(const Image& image, int connectivity) {
  const auto pairs = neighbor_pairs(image.height(), image.width(), connectivity);
  if (pairs.empty()) return 1.0;
  double s = 0.0;
  for (const auto& p : pairs) s += contrast(image, p.a, p.b);
  return s == 0.0 ? 1.0 : s / double(pairs.size());
}

double energy(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
              const EnergySetup& setup, const BinaryMask& labeling) {
  const auto t = terms(image, q, clicks, setup);
  std::vector<int> label(labeling.values().begin(), labeling.values().end());
  return evaluate(t, label);
}

Minimum exhaustive_minimum(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
                           const EnergySetup& setup, double rel_tol) {
  const int h = image.height(), w = image.width();
  const int n = h * w;
  const auto t = terms(image, q, clicks, setup);
  std::vector<double> all(std::size_t{1} << n);
  std::vector<int> label(static_cast<std::size_t>(n));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < all.size(); ++m) {
    for (int i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = (m >> i) & 1;
    all[m] = evaluate(t, label);
    best = std::min(best, all[m]);
  }
  Minimum out;
  out.energy = best;
  for (std::size_t m = 0; m < all.size(); ++m) {
    if (std::abs(all[m] - best) > rel_tol * std::max(1.0, std::abs(best))) continue;
    BinaryMask mask(h, w);
    for (int i = 0; i < n; ++i) mask.values()[static_cast<std::size_t>(i)] = (m >> i) & 1;
    out.minimizers.push_back(std::move(mask));
  }
  return out;
}

Click next_click(const BinaryMask& gt, const BinaryMask& current) {
  const int h = gt.height(), w = gt.width();
  std::vector<Pixel> correct, wrong;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) (gt(r, c) == current(r, c) ? correct : wrong).push_back({r, c});
  long long best = -1;
  Pixel arg{};
  for (const auto& p : wrong) {
    const long long frame = std::min({p.row + 1, p.col + 1, h - p.row, w - p.col});
    long long d = frame * frame;
    for (const auto& s : correct) d = std::min(d, sq_dist(p, s));
    if (d > best || (d == best && p < arg)) {
      best = d;
      arg = p;
    }
  }
  return {arg.row, arg.col, gt[arg] ? clicksel::Polarity::positive : clicksel::Polarity::negative};
}

std::vector<Pixel> farthest_point_sequence(const BinaryMask& g_c, const BinaryMask& g, Pixel first,
                                           std::size_t count) {
  const auto band = g_c.pixels();
  const auto base = g.pixels();
  // nearest[i]: squared distance from band[i] to G and every pick so far
  std::vector<long long> nearest(band.size(), std::numeric_limits<long long>::max());
  for (std::size_t i = 0; i < band.size(); ++i)
    for (const auto& s : base) nearest[i] = std::min(nearest[i], sq_dist(band[i], s));
  std::vector<Pixel> out;
  Pixel pick = first;
  while (true) {
    out.push_back(pick);
    for (std::size_t i = 0; i < band.size(); ++i) nearest[i] = std::min(nearest[i], sq_dist(band[i], pick));
    if (out.size() >= count) break;
    long long best = -1;
    for (std::size_t i = 0; i < band.size(); ++i)
      if (nearest[i] > best) {
        best = nearest[i];
        pick = band[i];
      }
  }
  return out;
}

namespace {

// Squared distance from p to the nearest pixel outside `region`; max if none.
long long margin_sq(const BinaryMask& region, Pixel p) {
  long long best = std::numeric_limits<long long>::max();
  for (int r = 0; r < region.height(); ++r)
    for (int c = 0; c < region.width(); ++c)
      if (!region(r, c)) best = std::min(best, sq_dist(p, {r, c}));
  return best;
}

void spacing(const std::vector<Pixel>& pts, const BinaryMask& region, const PairLimits& lim, bool check_margin,
             const std::string& what, std::vector<std::string>& out) {
  const long long m2 = static_cast<long long>(lim.d_margin) * lim.d_margin;
  const long long s2 = static_cast<long long>(lim.d_step) * lim.d_step;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (check_margin && margin_sq(region, pts[i]) < m2) out.push_back(what + ": margin");
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (sq_dist(pts[i], pts[j]) < s2) out.push_back(what + ": spacing");
  }
}

}  // namespace

std::vector<std::string> pair_violations(const clicksel::InstanceScene& scene, std::size_t target,
                                         const ClickSet& clicks, int strategy, bool relaxed,
                                         const PairLimits& lim) {
  std::vector<std::string> out;
  const auto& object = scene.instances[target];
  std::vector<Pixel> pos, neg;
  for (const auto& c : clicks.sequence()) (c.positive() ? pos : neg).push_back(c.pixel());

  if (pos.empty() || int(pos.size()) > lim.n_pos) out.push_back("positive count");
  for (const auto& p : pos)
    if (!object[p]) out.push_back("positive outside object");
  for (const auto& p : neg)
    if (object[p]) out.push_back("negative inside object");
  if (!relaxed) spacing(pos, object, lim, true, "positive", out);

  const auto band = margin_band(object, lim.d);
  if (strategy == 1) {
    if (int(neg.size()) > lim.n_neg1) out.push_back("strategy 1 count");
    for (const auto& p : neg)
      if (!band[p]) out.push_back("strategy 1 outside band");
    spacing(neg, band, lim, false, "strategy 1", out);
    // margin for strategy 1 is measured from the object
    const long long m2 = static_cast<long long>(lim.d_margin) * lim.d_margin;
    for (const auto& p : neg)
      for (const auto& o : object.pixels())
        if (sq_dist(p, o) < m2) {
          out.push_back("strategy 1 margin");
          break;
        }
  } else if (strategy == 2) {
    for (const auto& p : neg) {
      bool inside = false;
      for (std::size_t i = 0; i < scene.instances.size(); ++i)
        if (i != target && scene.instances[i][p]) inside = true;
      if (!inside) out.push_back("strategy 2 outside other objects");
    }
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
      if (i == target) continue;
      std::vector<Pixel> group;
      for (const auto& p : neg)
        if (scene.instances[i][p]) group.push_back(p);
      if (int(group.size()) > lim.n_neg2) out.push_back("strategy 2 count");
      spacing(group, scene.instances[i], lim, true, "strategy 2", out);
    }
  } else if (strategy == 3) {
    const auto expected = std::min<std::size_t>(std::size_t(lim.n_neg3), band.count());
    if (neg.size() != expected) out.push_back("strategy 3 count");
    if (!neg.empty()) {
      if (!band[neg.front()]) out.push_back("strategy 3 first click outside band");
      BinaryMask g = band.complement();
      const auto seq = farthest_point_sequence(band, g, neg.front(), neg.size());
      if (seq != neg) out.push_back("strategy 3 sequence");
    }
  } else {
    out.push_back("strategy id");
  }
  return out;
}

BinaryMask random_blob(int height, int width, std::mt19937_64& rng, int max_parts) {
  BinaryMask m(height, width);
  std::uniform_int_distribution<int> parts(1, max_parts);
  std::uniform_int_distribution<int> row(0, height - 1), col(0, width - 1);
  std::uniform_int_distribution<int> size(1, std::max(1, std::min(height, width) / 3));
  const int n = parts(rng);
  for (int k = 0; k < n; ++k) {
    const int r0 = row(rng), c0 = col(rng), s = size(rng);
    const bool disc = rng() & 1;
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        const bool inside = disc ? (r - r0) * (r - r0) + (c - c0) * (c - c0) <= s * s
                                 : std::abs(r - r0) <= s && std::abs(c - c0) <= s / 2 + 1;
        if (inside) m(r, c) = 1;
      }
  }
  return m;
}

Image random_image(int height, int width, std::mt19937_64& rng) {
  Image img(height, width);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(byte(rng));
  return img;
}

}  // namespace oracle
