#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clicksel/backend.hpp"
#include "clicksel/click_encoding.hpp"
#include "clicksel/graphcut.hpp"
#include "clicksel/scene.hpp"

namespace clicksel {

/// (image, clicks) -> selection. Must be deterministic and thread-safe.
using Segmenter = std::function<BinaryMask(const Image&, const ClickSet&)>;

/// Backend probability map for the current clicks (single-pixel clicks).
ProbabilityMap predict_clicks(const ProbabilityBackend& backend, const Image& image,
                              const ClickSet& clicks);

/// encode -> predict -> graph cut with disk hard constraints, or plain
/// thresholding at 0.5 when `use_graphcut` is false.
Segmenter make_segmenter(std::shared_ptr<const ProbabilityBackend> backend, EnergyParams params,
                         bool use_graphcut = true);

inline constexpr int kDefaultMaxClicks = 20;

/// Click at the mislabeled pixel farthest from the correctly labeled pixels
/// and the image frame; ties go to the smallest (row, col). Positive iff the
/// pixel belongs to the ground truth. Throws no_mislabeled_pixels.
Click next_click(const BinaryMask& gt, const BinaryMask& current);

struct EvalCurve {
  std::string object_id;
  std::vector<double> iu;      // iu[k] = IU after k + 1 clicks
  std::vector<Click> clicks;   // as placed
  BinaryMask final_mask;
};

EvalCurve run_sequence(const Segmenter& seg, const Image& image, const BinaryMask& gt,
                       int max_clicks = kDefaultMaxClicks, std::string object_id = {});

/// Smallest k with iu_k >= threshold, else max_clicks.
int clicks_to_threshold(const EvalCurve& curve, double threshold,
                        int max_clicks = kDefaultMaxClicks);
int clicks_to_threshold(std::span<const double> iu, double threshold,
                        int max_clicks = kDefaultMaxClicks);

struct EvalRow {
  std::string object_id;
  std::vector<double> iu;
  std::vector<int> clicks_to;  // one entry per threshold
};

struct EvalReport {
  std::string method;
  std::string dataset;
  int max_clicks = kDefaultMaxClicks;
  std::vector<double> thresholds;
  std::vector<double> mean_curve;    // length max_clicks, curves carried forward
  std::vector<double> mean_clicks;   // one per threshold
  std::vector<EvalRow> rows;
  nlohmann::json config = nlohmann::json::object();
};

/// Recomputes mean_curve and mean_clicks from rows.
void aggregate(EvalReport& report);

/// Evaluates every instance of every scene in order.
EvalReport evaluate_dataset(const Segmenter& seg, std::span<const InstanceScene> scenes,
                            std::span<const double> thresholds,
                            int max_clicks = kDefaultMaxClicks);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& json);
/// Aligned columns: mean clicks to reach each IU threshold.
std::string report_table(const EvalReport& report);
/// Mean IU after each click count.
std::string report_curve_csv(const EvalReport& report);

/// Evaluates each lambda on `scenes` and returns the best one: fewest mean
/// clicks to the last threshold, then highest mean IU over the curve.
struct LambdaChoice {
  double lambda = 1.0;
  std::vector<std::pair<double, EvalReport>> trials;
};
LambdaChoice select_lambda(std::shared_ptr<const ProbabilityBackend> backend,
                           const EnergyParams& base, std::span<const double> lambdas,
                           std::span<const InstanceScene> scenes,
                           std::span<const double> thresholds, int max_clicks = kDefaultMaxClicks);

}  // namespace clicksel
