#include "clicksel/click_sampling.hpp"

#include <algorithm>
#include <cmath>

#include "clicksel/kernels/edt.hpp"

namespace clicksel {

void SamplingParams::validate() const {
  if (d <= 0) fail(ErrorCode::invalid_argument, "sampling: d must be positive");
  if (n_pos < 1) fail(ErrorCode::invalid_argument, "sampling: n_pos must be >= 1");
  if (n_neg1 < 0 || n_neg2 < 0 || n_neg3 < 0 || n_pairs < 0)
    fail(ErrorCode::invalid_argument, "sampling: counts must be >= 0");
  if (d_step < 1) fail(ErrorCode::invalid_argument, "sampling: d_step must be >= 1");
  if (d_margin < 0) fail(ErrorCode::invalid_argument, "sampling: d_margin must be >= 0");
}

DistanceChannel distance_to_set(const BinaryMask& sources) {
  const auto sq = kernels::squared_edt(sources);
  DistanceChannel out(sources.height(), sources.width(), kDistanceCap);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const auto v = sq.values()[i];
    if (v == kernels::kNoSeed) continue;
    out.values()[i] = static_cast<float>(
        std::min(std::sqrt(static_cast<double>(v)), static_cast<double>(kDistanceCap)));
  }
  return out;
}

DistanceChannel boundary_distance(const BinaryMask& region) {
  return distance_to_set(region.complement());
}

MarginSets margin_sets(const BinaryMask& object, int d) {
  if (object.count() == 0) fail(ErrorCode::empty_input, "margin_sets: empty object");
  const auto sq = kernels::squared_edt(object);
  const auto d2 = static_cast<std::int64_t>(d) * d;
  MarginSets out{BinaryMask(object.height(), object.width()),
                 BinaryMask(object.height(), object.width())};
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const bool in_g = object.values()[i] != 0 || sq.values()[i] >= d2;
    out.g.values()[i] = in_g;
    out.g_c.values()[i] = !in_g;
  }
  return out;
}

std::vector<Pixel> filter_candidates(std::span<const Pixel> region,
                                     const DistanceChannel& boundary_dist, int d_step,
                                     int d_margin, Rng& rng) {
  std::vector<Pixel> order(region.begin(), region.end());
  std::shuffle(order.begin(), order.end(), rng);

  // Cells closer than d_step to an accepted pixel are blocked.
  Grid<std::uint8_t> blocked(boundary_dist.height(), boundary_dist.width());
  const int reach = d_step - 1;
  const auto step2 = static_cast<long long>(d_step) * d_step;
  std::vector<Pixel> kept;
  for (const auto& p : order) {
    if (blocked[p] || boundary_dist[p] < static_cast<float>(d_margin)) continue;
    kept.push_back(p);
    for (int dr = -reach; dr <= reach; ++dr)
      for (int dc = -reach; dc <= reach; ++dc) {
        if (static_cast<long long>(dr) * dr + static_cast<long long>(dc) * dc >= step2) continue;
        if (blocked.contains(p.row + dr, p.col + dc)) blocked(p.row + dr, p.col + dc) = 1;
      }
    blocked[p] = 1;
  }
  return kept;
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<Click> take_clicks(const std::vector<Pixel>& candidates, int n, Polarity polarity) {
  std::vector<Click> out;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(n), candidates.size());
  for (std::size_t i = 0; i < count; ++i)
    out.push_back({candidates[i].row, candidates[i].col, polarity});
  return out;
}

// Precomputed per-object quantities reused across all pairs of one object.
struct ObjectContext {
  const BinaryMask& object;
  std::vector<Pixel> object_pixels;
  DistanceChannel object_boundary;
  MarginSets margins;
  std::vector<Pixel> band_pixels;
  DistanceChannel distance_to_object;

  ObjectContext(const BinaryMask& obj, int d)
      : object(obj),
        object_pixels(obj.pixels()),
        object_boundary(boundary_distance(obj)),
        margins(margin_sets(obj, d)),
        band_pixels(margins.g_c.pixels()),
        distance_to_object(distance_to_set(obj)) {}
};

PositiveSample positive_from(const ObjectContext& ctx, const SamplingParams& params, Rng& rng) {
  const int n = uniform_int(rng, 1, params.n_pos);
  PositiveSample out;
  auto candidates =
      filter_candidates(ctx.object_pixels, ctx.object_boundary, params.d_step, params.d_margin, rng);
  if (candidates.empty()) {
    out.relaxed = true;
    candidates = filter_candidates(ctx.object_pixels, ctx.object_boundary, params.d_step, 0, rng);
  }
  if (candidates.empty())
    candidates = filter_candidates(ctx.object_pixels, ctx.object_boundary, 1, 0, rng);
  out.clicks = take_clicks(candidates, n, Polarity::positive);
  return out;
}

std::vector<Click> strategy1_from(const std::vector<Pixel>& band, const DistanceChannel& to_object,
                                  const SamplingParams& params, Rng& rng) {
  const int n = uniform_int(rng, 0, params.n_neg1);
  if (n == 0 || band.empty()) return {};
  auto candidates = filter_candidates(band, to_object, params.d_step, params.d_margin, rng);
  return take_clicks(candidates, n, Polarity::negative);
}

}  // namespace

PositiveSample sample_positive(const BinaryMask& object, const SamplingParams& params, Rng& rng) {
  params.validate();
  const ObjectContext ctx(object, params.d);
  return positive_from(ctx, params, rng);
}

std::vector<Click> sample_negative_strategy1(const BinaryMask& g_c, const BinaryMask& object,
                                             const SamplingParams& params, Rng& rng) {
  if (!g_c.same_shape(object)) fail(ErrorCode::dimension_mismatch, "strategy 1: shape mismatch");
  return strategy1_from(g_c.pixels(), distance_to_set(object), params, rng);
}

std::vector<Click> sample_negative_strategy2(const InstanceScene& scene, std::size_t target_index,
                                             const SamplingParams& params, Rng& rng) {
  std::vector<Click> out;
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    if (i == target_index) continue;
    const auto& other = scene.instances[i];
    const int n = uniform_int(rng, 0, params.n_neg2);
    if (n == 0) continue;
    const auto candidates = filter_candidates(other.pixels(), boundary_distance(other),
                                              params.d_step, params.d_margin, rng);
    const auto picked = take_clicks(candidates, n, Polarity::negative);
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

std::vector<Click> sample_negative_strategy3(const BinaryMask& g_c, const BinaryMask& g,
                                             const SamplingParams& params, Rng& rng) {
  if (!g_c.same_shape(g)) fail(ErrorCode::dimension_mismatch, "strategy 3: shape mismatch");
  const auto band = g_c.pixels();
  if (band.empty() || params.n_neg3 == 0) return {};

  std::vector<Click> out;
  const auto first = band[static_cast<std::size_t>(
      uniform_int(rng, 0, static_cast<int>(band.size()) - 1))];
  out.push_back({first.row, first.col, Polarity::negative});

  BinaryMask sources = g;
  sources[first] = 1;
  const auto total = std::min<std::size_t>(static_cast<std::size_t>(params.n_neg3), band.size());
  while (out.size() < total) {
    const auto sq = kernels::squared_edt(sources);
    // band is in row-major order, so a strict '>' keeps the smallest (row, col) on ties.
    Pixel best = band.front();
    std::int64_t best_d = -1;
    for (const auto& p : band) {
      if (sq[p] > best_d) {
        best_d = sq[p];
        best = p;
      }
    }
    out.push_back({best.row, best.col, Polarity::negative});
    sources[best] = 1;
  }
  return out;
}

Rng make_stream(std::uint64_t seed, std::string_view source_id) {
  // FNV-1a keeps the stream independent of std::hash.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : source_id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

std::string source_id_for(const InstanceScene& scene, std::size_t target_index) {
  return scene.id + "/" + std::to_string(target_index);
}

std::vector<TrainingPair> generate_pairs(const InstanceScene& scene, std::size_t target_index,
                                         const SamplingParams& params, Rng& rng) {
  params.validate();
  if (target_index >= scene.instances.size())
    fail(ErrorCode::invalid_argument, "generate_pairs: target index out of range");
  const auto& object = scene.instances[target_index];
  if (object.count() == 0) fail(ErrorCode::empty_input, "generate_pairs: empty target");

  const ObjectContext ctx(object, params.d);
  const auto image = std::make_shared<const Image>(scene.image);
  const auto source = source_id_for(scene, target_index);

  std::vector<TrainingPair> pairs;
  pairs.reserve(static_cast<std::size_t>(params.n_pairs));
  for (int k = 0; k < params.n_pairs; ++k) {
    TrainingPair pair;
    pair.target = object;
    pair.source_id = source;
    pair.image = image;
    auto positive = positive_from(ctx, params, rng);
    pair.relaxed = positive.relaxed;
    for (const auto& c : positive.clicks) pair.clicks.add(c);

    pair.strategy_used = uniform_int(rng, 1, 3);
    std::vector<Click> negatives;
    switch (pair.strategy_used) {
      case 1:
        negatives = strategy1_from(ctx.band_pixels, ctx.distance_to_object, params, rng);
        break;
      case 2:
        negatives = sample_negative_strategy2(scene, target_index, params, rng);
        break;
      default:
        negatives = sample_negative_strategy3(ctx.margins.g_c, ctx.margins.g, params, rng);
        break;
    }
    for (const auto& c : negatives) pair.clicks.add(c);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<TrainingPair> generate_pairs(const InstanceScene& scene, std::size_t target_index,
                                         const SamplingParams& params) {
  auto rng = make_stream(params.seed, source_id_for(scene, target_index));
  return generate_pairs(scene, target_index, params, rng);
}

namespace {

void check_spacing(const std::vector<Pixel>& group, const DistanceChannel& boundary,
                   const SamplingParams& params, const std::string& what,
                   std::vector<std::string>& out) {
  const auto step2 = static_cast<long long>(params.d_step) * params.d_step;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (boundary[group[i]] < static_cast<float>(params.d_margin))
      out.push_back(what + " click closer than d_margin to its boundary");
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      const long long dr = group[i].row - group[j].row;
      const long long dc = group[i].col - group[j].col;
      if (dr * dr + dc * dc < step2) out.push_back(what + " clicks closer than d_step");
    }
  }
}

}  // namespace

std::vector<std::string> check_pair(const InstanceScene& scene, std::size_t target_index,
                                    const TrainingPair& pair, const SamplingParams& params) {
  std::vector<std::string> out;
  const auto& object = scene.instances.at(target_index);
  const auto positives = pair.clicks.positives();
  const auto negatives = pair.clicks.negatives();

  if (positives.empty()) out.push_back("no positive click");
  if (static_cast<int>(positives.size()) > params.n_pos) out.push_back("too many positive clicks");
  for (const auto& p : positives)
    if (!object.contains(p) || !object.test(p)) out.push_back("positive click outside the object");
  for (const auto& p : negatives)
    if (!object.contains(p) || object.test(p)) out.push_back("negative click inside the object");
  if (!pair.relaxed) check_spacing(positives, boundary_distance(object), params, "positive", out);

  const auto margins = margin_sets(object, params.d);
  switch (pair.strategy_used) {
    case 1: {
      if (static_cast<int>(negatives.size()) > params.n_neg1)
        out.push_back("strategy 1: too many clicks");
      for (const auto& p : negatives)
        if (!margins.g_c.test(p)) out.push_back("strategy 1: click outside G^c");
      check_spacing(negatives, distance_to_set(object), params, "strategy 1", out);
      break;
    }
    case 2: {
      for (std::size_t i = 0; i < scene.instances.size(); ++i) {
        if (i == target_index) continue;
        const auto& other = scene.instances[i];
        std::vector<Pixel> group;
        for (const auto& p : negatives)
          if (other.test(p)) group.push_back(p);
        if (static_cast<int>(group.size()) > params.n_neg2)
          out.push_back("strategy 2: too many clicks on one instance");
        check_spacing(group, boundary_distance(other), params, "strategy 2", out);
      }
      for (const auto& p : negatives) {
        bool inside_other = false;
        for (std::size_t i = 0; i < scene.instances.size(); ++i)
          if (i != target_index && scene.instances[i].test(p)) inside_other = true;
        if (!inside_other) out.push_back("strategy 2: click outside every negative instance");
      }
      break;
    }
    case 3: {
      const auto band_size = margins.g_c.count();
      const auto expected = std::min<std::size_t>(static_cast<std::size_t>(params.n_neg3), band_size);
      if (negatives.size() != expected) out.push_back("strategy 3: wrong click count");
      BinaryMask sources = margins.g;
      for (std::size_t k = 0; k < negatives.size(); ++k) {
        const auto& p = negatives[k];
        if (!margins.g_c.test(p)) out.push_back("strategy 3: click outside G^c");
        if (k > 0) {
          const auto sq = kernels::squared_edt(sources);
          std::int64_t best = -1;
          for (const auto& q : margins.g_c.pixels()) best = std::max(best, sq[q]);
          if (sq[p] != best) out.push_back("strategy 3: click is not the farthest point");
        }
        sources[p] = 1;
      }
      break;
    }
    default:
      out.push_back("unknown strategy");
  }
  return out;
}

}  // namespace clicksel
