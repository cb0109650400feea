#pragma once

// Brute-force reference computations. Nothing here calls the library code
// under test beyond plain data types.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clicksel/click_encoding.hpp"
#include "clicksel/image.hpp"
#include "clicksel/scene.hpp"

namespace oracle {

using clicksel::BinaryMask;
using clicksel::Click;
using clicksel::ClickSet;
using clicksel::Image;
using clicksel::Pixel;
using clicksel::ProbabilityMap;

inline long long sq_dist(Pixel a, Pixel b) {
  const long long dr = a.row - b.row;
  const long long dc = a.col - b.col;
  return dr * dr + dc * dc;
}

/// min over sources of Euclidean distance, truncated at 255; 255 if no source.
clicksel::Grid<float> distance_map(const std::vector<Pixel>& sources, int height, int width);

/// Squared distance to the nearest set pixel, -1 where the mask is empty.
clicksel::Grid<long long> squared_distance(const BinaryMask& sources);

/// {p not in O : min distance to O < d} via exhaustive search.
BinaryMask margin_band(const BinaryMask& object, int d);

/// Pixels within Euclidean distance `radius` of `center`, tested in floating point.
bool in_disk(Pixel p, Pixel center, int radius);

struct EnergySetup {
  double lambda = 1.0;
  double sigma_sq = 1.0;
  int connectivity = 8;
  int hard_radius = 5;
  double prob_clamp = 1e-6;
  bool zero_pairwise = false;
};

/// sigma^2 estimate: mean squared per-channel contrast over neighbor pairs (1 if zero).
double sigma_sq(const Image& image, int connectivity);

/// Energy of a labeling straight from the definitions. Hard-constrained
/// pixels contribute nothing when labeled as their click (later click wins);
/// returns +inf if the labeling violates a constraint.
double energy(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
              const EnergySetup& setup, const BinaryMask& labeling);

struct Minimum {
  double energy = 0.0;
  std::vector<BinaryMask> minimizers;  // all labelings within tolerance of the minimum
};

/// Enumerates all 2^(H*W) labelings (H*W <= 20).
Minimum exhaustive_minimum(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
                           const EnergySetup& setup, double rel_tol = 1e-12);

/// argmax over mislabeled pixels of the distance to the nearest correctly
/// labeled pixel or to the outside of the image; smallest (row, col) on ties.
Click next_click(const BinaryMask& gt, const BinaryMask& current);

/// Greedy farthest-point sequence over Gc w.r.t. G plus previous picks,
/// starting from `first`; row-major first among ties.
std::vector<Pixel> farthest_point_sequence(const BinaryMask& g_c, const BinaryMask& g, Pixel first,
                                           std::size_t count);

/// Independent constraint check of one sampled pair; returns the violations.
struct PairLimits {
  int d = 40;
  int n_pos = 5;
  int n_neg1 = 10;
  int n_neg2 = 5;
  int n_neg3 = 10;
  int d_step = 10;
  int d_margin = 5;
};
std::vector<std::string> pair_violations(const clicksel::InstanceScene& scene, std::size_t target,
                                         const ClickSet& clicks, int strategy, bool relaxed,
                                         const PairLimits& limits);

/// Random blobby mask: union of a few random discs and rectangles.
BinaryMask random_blob(int height, int width, std::mt19937_64& rng, int max_parts = 3);
Image random_image(int height, int width, std::mt19937_64& rng);

}  // namespace oracle
