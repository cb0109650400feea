#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "clicksel/click_encoding.hpp"
#include "clicksel/image.hpp"

namespace clicksel {

struct EnergyParams {
  double lambda = 1.0;                // weight of the region term
  std::optional<double> sigma_sq;     // nullopt = estimate from the image
  int connectivity = 8;               // 4 or 8
  int hard_radius = 5;                // click disk radius for hard constraints
  double prob_clamp = 1e-6;

  void validate() const;
};

struct Offset {
  int drow;
  int dcol;
};

/// Binary energy on the pixel grid. Source side = object.
///   cost_object[p]     paid when p is labeled object  (lambda * -log q)
///   cost_background[p] paid when p is labeled background (lambda * -log(1 - q))
/// Hard-constrained pixels pay 0 for their click's label and `sentinel` for
/// the other. Pairwise weights are stored once per unordered neighbor pair,
/// indexed [pixel * forward_offsets().size() + k]; out-of-grid entries are 0.
struct PixelGraph {
  int height = 0;
  int width = 0;
  int connectivity = 8;
  double lambda = 1.0;
  double sigma_sq = 1.0;
  double sentinel = 0.0;
  std::vector<double> cost_object;
  std::vector<double> cost_background;
  std::vector<std::int8_t> hard;  // -1 free, 0 background, 1 object
  std::vector<double> pairwise;

  std::span<const Offset> forward_offsets() const;
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

std::span<const Offset> forward_offsets(int connectivity);

struct CutResult {
  BinaryMask labeling;
  double energy = 0.0;
  double flow = 0.0;
  std::size_t augmentations = 0;
  double runtime_ms = 0.0;
};

/// Mean over neighbor pairs of the mean squared per-channel difference; 1 for a flat image.
double estimate_sigma_sq(const Image& image, int connectivity);

/// Pixels within Euclidean distance `radius` of each click, later clicks overriding earlier ones.
std::vector<std::int8_t> hard_labels(const ClickSet& clicks, int height, int width, int radius);

PixelGraph build_energy(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
                        const EnergyParams& params);

CutResult min_cut(const PixelGraph& graph);

double energy_of(const PixelGraph& graph, const BinaryMask& labeling);

/// Sum of pairwise weights across label boundaries of `labeling`.
double boundary_cost(const PixelGraph& graph, const BinaryMask& labeling);

BinaryMask refine(const Image& image, const ProbabilityMap& q, const ClickSet& clicks,
                  const EnergyParams& params);

/// Plain-text edge list for cross-implementation diffing.
void dump_graph(const PixelGraph& graph, std::ostream& out);

}  // namespace clicksel
