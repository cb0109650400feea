#include "clicksel/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "clicksel/kernels/edt.hpp"

namespace clicksel {

ProbabilityMap predict_clicks(const ProbabilityBackend& backend, const Image& image,
                              const ClickSet& clicks) {
  auto q = backend.predict(encode(image, clicks));
  if (!q.same_shape(image.height(), image.width()))
    fail(ErrorCode::dimension_mismatch, "backend " + backend.name() + " changed the map size");
  return q;
}

Segmenter make_segmenter(std::shared_ptr<const ProbabilityBackend> backend, EnergyParams params,
                         bool use_graphcut) {
  params.validate();
  return [backend = std::move(backend), params, use_graphcut](const Image& image,
                                                               const ClickSet& clicks) {
    const auto q = predict_clicks(*backend, image, clicks);
    if (!use_graphcut) return q.threshold(0.5f);
    return refine(image, q, clicks, params);
  };
}

Click next_click(const BinaryMask& gt, const BinaryMask& current) {
  if (!gt.same_shape(current)) fail(ErrorCode::dimension_mismatch, "next_click: shape mismatch");
  // Seeds are the correctly labeled pixels; the frame is added by the framed transform.
  Grid<std::uint8_t> correct(gt.height(), gt.width());
  bool any_error = false;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool wrong = (gt.values()[i] != 0) != (current.values()[i] != 0);
    correct.values()[i] = !wrong;
    any_error = any_error || wrong;
  }
  if (!any_error) fail(ErrorCode::no_mislabeled_pixels, "selection already matches ground truth");

  const auto sq = kernels::squared_edt_framed(correct);
  Pixel best{};
  std::int64_t best_d = -1;
  for (int r = 0; r < gt.height(); ++r)
    for (int c = 0; c < gt.width(); ++c) {
      if (correct(r, c)) continue;
      if (sq(r, c) > best_d) {
        best_d = sq(r, c);
        best = {r, c};
      }
    }
  return {best.row, best.col, gt.test(best) ? Polarity::positive : Polarity::negative};
}

EvalCurve run_sequence(const Segmenter& seg, const Image& image, const BinaryMask& gt,
                       int max_clicks, std::string object_id) {
  if (max_clicks < 1) fail(ErrorCode::invalid_argument, "max_clicks must be >= 1");
  if (!gt.same_shape(image.height(), image.width()))
    fail(ErrorCode::dimension_mismatch, "ground truth does not match the image size");
  EvalCurve curve;
  curve.object_id = std::move(object_id);
  curve.final_mask = BinaryMask(image.height(), image.width());
  ClickSet clicks;
  for (int k = 0; k < max_clicks; ++k) {
    const auto click = next_click(gt, curve.final_mask);
    clicks.add(click);
    curve.clicks.push_back(click);
    curve.final_mask = seg(image, clicks);
    curve.iu.push_back(iou(curve.final_mask, gt));
    if (curve.iu.back() >= 1.0) break;
  }
  return curve;
}

int clicks_to_threshold(std::span<const double> iu, double threshold, int max_clicks) {
  if (iu.empty()) fail(ErrorCode::empty_input, "clicks_to_threshold: empty curve");
  if (!(threshold > 0.0 && threshold <= 1.0))
    fail(ErrorCode::invalid_argument, "threshold must lie in (0, 1]");
  for (std::size_t k = 0; k < iu.size() && static_cast<int>(k) < max_clicks; ++k)
    if (iu[k] >= threshold) return static_cast<int>(k) + 1;
  return max_clicks;
}

int clicks_to_threshold(const EvalCurve& curve, double threshold, int max_clicks) {
  return clicks_to_threshold(curve.iu, threshold, max_clicks);
}

void aggregate(EvalReport& report) {
  const auto m = static_cast<std::size_t>(report.max_clicks);
  report.mean_curve.assign(m, 0.0);
  report.mean_clicks.assign(report.thresholds.size(), 0.0);
  if (report.rows.empty()) return;
  for (const auto& row : report.rows) {
    for (std::size_t k = 0; k < m; ++k) {
      const double v = row.iu.empty() ? 0.0 : row.iu[std::min(k, row.iu.size() - 1)];
      report.mean_curve[k] += v;
    }
    for (std::size_t t = 0; t < report.thresholds.size(); ++t)
      report.mean_clicks[t] += row.clicks_to[t];
  }
  const auto n = static_cast<double>(report.rows.size());
  for (auto& v : report.mean_curve) v /= n;
  for (auto& v : report.mean_clicks) v /= n;
}

EvalReport evaluate_dataset(const Segmenter& seg, std::span<const InstanceScene> scenes,
                            std::span<const double> thresholds, int max_clicks) {
  struct Item {
    const InstanceScene* scene;
    std::size_t instance;
  };
  std::vector<Item> items;
  for (const auto& s : scenes)
    for (std::size_t k = 0; k < s.instances.size(); ++k) items.push_back({&s, k});
  if (items.empty()) fail(ErrorCode::empty_input, "evaluate_dataset: no objects");

  EvalReport report;
  report.max_clicks = max_clicks;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  report.rows.resize(items.size());

  const auto count = static_cast<long>(items.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      const auto& item = items[static_cast<std::size_t>(i)];
      const auto id = item.scene->id + "/" + std::to_string(item.instance);
      const auto curve = run_sequence(seg, item.scene->image, item.scene->instances[item.instance],
                                      max_clicks, id);
      EvalRow row;
      row.object_id = id;
      row.iu = curve.iu;
      for (const double t : thresholds) row.clicks_to.push_back(clicks_to_threshold(curve, t, max_clicks));
      report.rows[static_cast<std::size_t>(i)] = std::move(row);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  aggregate(report);
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["method"] = report.method;
  j["dataset"] = report.dataset;
  j["max_clicks"] = report.max_clicks;
  j["thresholds"] = report.thresholds;
  j["object_count"] = report.rows.size();
  j["mean_curve"] = report.mean_curve;
  j["mean_clicks_to_threshold"] = report.mean_clicks;
  j["config"] = report.config;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows)
    j["rows"].push_back({{"object", row.object_id}, {"iu", row.iu}, {"clicks_to", row.clicks_to}});
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.max_clicks = j.at("max_clicks").get<int>();
  r.thresholds = j.at("thresholds").get<std::vector<double>>();
  r.mean_curve = j.at("mean_curve").get<std::vector<double>>();
  r.mean_clicks = j.at("mean_clicks_to_threshold").get<std::vector<double>>();
  r.config = j.value("config", nlohmann::json::object());
  for (const auto& row : j.at("rows"))
    r.rows.push_back({row.at("object").get<std::string>(), row.at("iu").get<std::vector<double>>(),
                      row.at("clicks_to").get<std::vector<int>>()});
  return r;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "Mean number of clicks to reach IU (" << report.rows.size() << " objects, capped at "
      << report.max_clicks << ")\n";
  std::snprintf(buf, sizeof buf, "%-18s %-14s", "Method", "Dataset");
  out << buf;
  for (const double t : report.thresholds) {
    std::snprintf(buf, sizeof buf, " %9s", (std::to_string(static_cast<int>(std::lround(t * 100))) + "%").c_str());
    out << buf;
  }
  out << "\n";
  std::snprintf(buf, sizeof buf, "%-18s %-14s", report.method.c_str(), report.dataset.c_str());
  out << buf;
  for (const double v : report.mean_clicks) {
    std::snprintf(buf, sizeof buf, " %9.2f", v);
    out << buf;
  }
  out << "\n";
  return out.str();
}

std::string report_curve_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "clicks,mean_iu\n";
  char buf[64];
  for (std::size_t k = 0; k < report.mean_curve.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", k + 1, report.mean_curve[k]);
    out << buf;
  }
  return out.str();
}

LambdaChoice select_lambda(std::shared_ptr<const ProbabilityBackend> backend,
                           const EnergyParams& base, std::span<const double> lambdas,
                           std::span<const InstanceScene> scenes,
                           std::span<const double> thresholds, int max_clicks) {
  if (lambdas.empty()) fail(ErrorCode::empty_input, "select_lambda: no candidates");
  if (thresholds.empty()) fail(ErrorCode::empty_input, "select_lambda: no thresholds");
  LambdaChoice choice;
  double best_clicks = 0.0;
  double best_area = 0.0;
  for (const double lambda : lambdas) {
    auto params = base;
    params.lambda = lambda;
    auto report = evaluate_dataset(make_segmenter(backend, params), scenes, thresholds, max_clicks);
    const double clicks = report.mean_clicks.back();
    const double area = std::accumulate(report.mean_curve.begin(), report.mean_curve.end(), 0.0);
    if (choice.trials.empty() || clicks < best_clicks ||
        (clicks == best_clicks && area > best_area)) {
      choice.lambda = lambda;
      best_clicks = clicks;
      best_area = area;
    }
    choice.trials.emplace_back(lambda, std::move(report));
  }
  return choice;
}

}  // namespace clicksel
