#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clicksel/click_encoding.hpp"
#include "clicksel/scene.hpp"

namespace clicksel {

using Rng = std::mt19937_64;

struct SamplingParams {
  int d = 40;        // width of the background band around the object
  int n_pos = 5;
  int n_neg1 = 10;
  int n_neg2 = 5;
  int n_neg3 = 10;
  int n_pairs = 15;
  int d_step = 10;   // minimum spacing between sampled clicks
  int d_margin = 5;  // minimum distance from the object boundary
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingPair {
  ClickSet clicks;
  BinaryMask target;
  int strategy_used = 1;
  std::string source_id;
  /// Positive sampling had to relax d_margin / d_step to find any candidate.
  bool relaxed = false;
  std::shared_ptr<const Image> image;
};

struct MarginSets {
  BinaryMask g;         // object pixels plus background at distance >= d
  BinaryMask g_c;       // background band with distance in (0, d)
};

/// Euclidean distance from every pixel to the nearest pixel of `sources`, capped at 255.
DistanceChannel distance_to_set(const BinaryMask& sources);

/// Distance from each pixel to the nearest pixel outside `region` (255 if none).
DistanceChannel boundary_distance(const BinaryMask& region);

MarginSets margin_sets(const BinaryMask& object, int d);

/// Greedy spacing filter in a seeded random scan order.
std::vector<Pixel> filter_candidates(std::span<const Pixel> region,
                                     const DistanceChannel& boundary_dist, int d_step,
                                     int d_margin, Rng& rng);

struct PositiveSample {
  std::vector<Click> clicks;
  bool relaxed = false;
};

PositiveSample sample_positive(const BinaryMask& object, const SamplingParams& params, Rng& rng);

std::vector<Click> sample_negative_strategy1(const BinaryMask& g_c, const BinaryMask& object,
                                             const SamplingParams& params, Rng& rng);

std::vector<Click> sample_negative_strategy2(const InstanceScene& scene, std::size_t target_index,
                                             const SamplingParams& params, Rng& rng);

/// First click uniform in G^c, then repeated farthest-point selection over
/// G^c with respect to G and all previous negatives; ties go to the smallest
/// (row, col).
std::vector<Click> sample_negative_strategy3(const BinaryMask& g_c, const BinaryMask& g,
                                             const SamplingParams& params, Rng& rng);

/// Private RNG stream for one object, independent of processing order.
Rng make_stream(std::uint64_t seed, std::string_view source_id);

std::string source_id_for(const InstanceScene& scene, std::size_t target_index);

std::vector<TrainingPair> generate_pairs(const InstanceScene& scene, std::size_t target_index,
                                         const SamplingParams& params, Rng& rng);
/// Uses make_stream(params.seed, source_id_for(scene, target_index)).
std::vector<TrainingPair> generate_pairs(const InstanceScene& scene, std::size_t target_index,
                                         const SamplingParams& params);

/// Lists every constraint a pair violates (empty when valid).
std::vector<std::string> check_pair(const InstanceScene& scene, std::size_t target_index,
                                    const TrainingPair& pair, const SamplingParams& params);

}  // namespace clicksel
