#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clicksel/click_io.hpp"
#include "clicksel/dataset.hpp"
#include "clicksel/graphcut.hpp"
#include "clicksel/image_io.hpp"
#include "clicksel/kernels/exec.hpp"
#include "clicksel/model.hpp"
#include "clicksel/service.hpp"
#include "clicksel/simulator.hpp"
#include "clicksel/synth.hpp"

namespace clicksel::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  bool verbose = false;
};

struct EnergyFlags {
  double lambda = 1.0;
  std::string sigma = "auto";
  int connectivity = 8;
  int hard_radius = 5;
  bool no_graphcut = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--lambda", lambda, "Weight of the region term")->capture_default_str();
    cmd.add_option("--sigma", sigma, "Boundary-term sigma, or 'auto' to estimate sigma^2 from the image")
        ->capture_default_str();
    cmd.add_option("--connectivity", connectivity, "Pixel neighborhood (4 or 8)")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();
    cmd.add_option("--hard-radius", hard_radius, "Radius of the hard-constraint disk at each click")
        ->capture_default_str();
    cmd.add_flag("--no-graphcut", no_graphcut, "Threshold the probability map at 0.5 instead of refining");
  }

  EnergyParams params() const {
    EnergyParams p;
    p.lambda = lambda;
    p.connectivity = connectivity;
    p.hard_radius = hard_radius;
    if (sigma != "auto") {
      double s = 0.0;
      try {
        std::size_t used = 0;
        s = std::stod(sigma, &used);
        if (used != sigma.size()) throw std::invalid_argument(sigma);
      } catch (const std::exception&) {
        fail(ErrorCode::invalid_argument, "--sigma must be 'auto' or a number, got '" + sigma + "'");
      }
      if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "--sigma must be positive");
      p.sigma_sq = s * s;
    }
    p.validate();
    return p;
  }

  json to_json() const {
    return {{"lambda", lambda}, {"sigma", sigma}, {"connectivity", connectivity},
            {"hard_radius", hard_radius}, {"graphcut", !no_graphcut}};
  }
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::invalid_argument, std::string(flag) + ": not a number: '" + item + "'");
    }
  }
  if (values.empty()) fail(ErrorCode::invalid_argument, std::string(flag) + " is empty");
  return values;
}

std::shared_ptr<const ProbabilityBackend> load_backend(const fs::path& path) {
  return std::make_shared<ReferenceBackend>(load_model(path));
}

ClickSet read_clicks_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '['))
    return parse_clicks(arg);
  return parse_clicks(read_text(arg));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string scene_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu", index);
  return buf;
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 step so neighbouring indices land far apart
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Looks the ground truth up by image identity; only valid for scenes owned
/// by the caller for the duration of the evaluation.
Segmenter oracle_segmenter(std::span<const InstanceScene> scenes) {
  auto index = std::make_shared<std::map<const void*, const InstanceScene*>>();
  for (const auto& s : scenes) (*index)[s.image.bytes().data()] = &s;
  return [index](const Image& image, const ClickSet& clicks) {
    const auto it = index->find(image.bytes().data());
    if (it == index->end() || clicks.empty()) return BinaryMask(image.height(), image.width());
    const Click first = clicks.sequence().front();
    for (const auto& m : it->second->instances)
      if (m.test(first.row, first.col)) return m;
    return BinaryMask(image.height(), image.width());
  };
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interactive object selection: click sampling, training, graph-cut refinement and evaluation",
               "clicksel"};
  app.require_subcommand(1);
  app.allow_extras(false);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = OpenMP default)")->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Progress output on stderr");

  auto log = [&](const std::string& msg) {
    if (g.verbose) err << msg << std::endl;
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset of 64x64 scenes");
  std::size_t synth_count = 0;
  std::string synth_out;
  synth->add_option("--count", synth_count, "Number of scenes")->required();
  synth->add_option("--out", synth_out, "Output dataset directory")->required();

  // split
  auto* splitc = app.add_subcommand("split", "Retag train scenes of a dataset (e.g. as validation)");
  std::string split_dataset, split_tag = "val";
  std::size_t split_count = 0;
  splitc->add_option("--dataset", split_dataset, "Dataset directory")->required();
  splitc->add_option("--count", split_count, "Number of train scenes to retag")->required();
  splitc->add_option("--tag", split_tag, "New split name")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Sample (clicks, target) training pairs from a dataset");
  std::string sample_dataset, sample_out, sample_split = "train";
  bool sample_flip = false;
  SamplingParams sp;
  sample->add_option("--dataset", sample_dataset, "Dataset directory")->required();
  sample->add_option("--out", sample_out, "Output pairs directory")->required();
  sample->add_option("--split", sample_split, "Split to sample from ('all' for every scene)")
      ->capture_default_str();
  sample->add_flag("--flip-augment", sample_flip, "Also sample from horizontally mirrored scenes");
  sample->add_option("--d", sp.d, "Background band width around the object")->capture_default_str();
  sample->add_option("--n-pos", sp.n_pos, "Max positive clicks per pair")->capture_default_str();
  sample->add_option("--n-neg1", sp.n_neg1, "Max negatives, strategy 1")->capture_default_str();
  sample->add_option("--n-neg2", sp.n_neg2, "Max negatives per other object, strategy 2")
      ->capture_default_str();
  sample->add_option("--n-neg3", sp.n_neg3, "Negatives, strategy 3")->capture_default_str();
  sample->add_option("--n-pairs", sp.n_pairs, "Pairs per object")->capture_default_str();
  sample->add_option("--d-step", sp.d_step, "Min spacing between clicks")->capture_default_str();
  sample->add_option("--d-margin", sp.d_margin, "Min distance from the object boundary")
      ->capture_default_str();

  // train
  auto* trainc = app.add_subcommand("train", "Train the reference model on sampled pairs");
  std::string train_pairs, train_model_out, train_history;
  TrainConfig tc;
  train_history.clear();
  trainc->add_option("--pairs", train_pairs, "Pairs directory")->required();
  trainc->add_option("--model-out", train_model_out, "Model file to write")->required();
  trainc->add_option("--history", train_history, "Loss history JSON (default: <model-out>.history.json)");
  trainc->add_option("--learning-rate", tc.learning_rate, "SGD step size")->capture_default_str();
  trainc->add_option("--momentum", tc.momentum, "SGD momentum")->capture_default_str();
  trainc->add_option("--epochs", tc.epochs, "Passes over the pairs")->capture_default_str();
  trainc->add_option("--batch-size", tc.batch_size, "Pairs per step")->capture_default_str();

  // segment
  auto* segment = app.add_subcommand("segment", "Segment one image from clicks");
  std::string seg_model, seg_image, seg_clicks, seg_out, seg_dump, seg_prob;
  EnergyFlags seg_energy;
  segment->add_option("--model", seg_model, "Model file")->required();
  segment->add_option("--image", seg_image, "Input image (PNG/PPM)")->required();
  segment->add_option("--clicks", seg_clicks,
                      "Clicks as inline JSON or a JSON file: "
                      "{\"positives\": [[r,c],...], \"negatives\": [[r,c],...]}")
      ->required();
  segment->add_option("--out", seg_out, "Output mask PNG")->required();
  segment->add_option("--dump-graph", seg_dump, "Write the pixel graph as a plain-text edge list");
  segment->add_option("--probability-out", seg_prob, "Write the probability map as an 8-bit PNG");
  seg_energy.add_to(*segment);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Simulated-clicker evaluation on a dataset split");
  std::string ev_model, ev_dataset, ev_split = "test", ev_thresholds = "0.85,0.9", ev_out = "eval";
  int ev_max_clicks = kDefaultMaxClicks;
  bool ev_oracle = false;
  EnergyFlags ev_energy;
  evaluate->add_option("--model", ev_model, "Model file");
  evaluate->add_option("--dataset", ev_dataset, "Dataset directory")->required();
  evaluate->add_option("--split", ev_split, "Split to evaluate ('all' for every scene)")
      ->capture_default_str();
  evaluate->add_option("--thresholds", ev_thresholds, "Comma-separated IU thresholds")
      ->capture_default_str();
  evaluate->add_option("--max-clicks", ev_max_clicks, "Click budget per object")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_option("--out", ev_out, "Output prefix: <out>.json, <out>.txt, <out>.csv")
      ->capture_default_str();
  evaluate->add_flag("--oracle-segmenter", ev_oracle)->group("");
  ev_energy.add_to(*evaluate);

  // tune
  auto* tune = app.add_subcommand("tune", "Pick lambda on a validation split");
  std::string tu_model, tu_dataset, tu_split = "val", tu_lambdas = "0.5,1,2,5",
                                    tu_thresholds = "0.85,0.9", tu_out;
  int tu_max_clicks = kDefaultMaxClicks;
  EnergyFlags tu_energy;
  tune->add_option("--model", tu_model, "Model file")->required();
  tune->add_option("--dataset", tu_dataset, "Dataset directory")->required();
  tune->add_option("--split", tu_split, "Split to tune on")->capture_default_str();
  tune->add_option("--lambdas", tu_lambdas, "Comma-separated candidate lambdas")->capture_default_str();
  tune->add_option("--thresholds", tu_thresholds, "Comma-separated IU thresholds")
      ->capture_default_str();
  tune->add_option("--max-clicks", tu_max_clicks, "Click budget per object")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tune->add_option("--out", tu_out, "Write the choice and per-lambda reports as JSON");
  tu_energy.add_to(*tune);

  // serve
  auto* serve = app.add_subcommand(
      "serve", "HTTP session service (flags override CLICKSEL_* environment variables)");
  ServiceConfig sc;
  std::string sv_model, sv_static;
  int sv_ttl = 1800;
  EnergyFlags sv_energy;
  serve->add_option("--model", sv_model, "Model file")->envname("CLICKSEL_MODEL")->required();
  serve->add_option("--host", sc.host, "Bind address")->envname("CLICKSEL_HOST")->capture_default_str();
  serve->add_option("--port", sc.port, "Listen port")->envname("CLICKSEL_PORT")->capture_default_str();
  serve->add_option("--max-image-dim", sc.max_image_dim, "Largest accepted image side")
      ->envname("CLICKSEL_MAX_IMAGE_DIM")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--session-ttl", sv_ttl, "Idle session lifetime in seconds")
      ->envname("CLICKSEL_SESSION_TTL")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--static-dir", sv_static, "Serve web client files from this directory")
      ->envname("CLICKSEL_STATIC_DIR");
  sv_energy.add_to(*serve);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (g.threads > 0) kernels::set_threads(g.threads);

    if (synth->parsed()) {
      std::vector<InstanceScene> scenes(synth_count);
#pragma omp parallel for schedule(dynamic)
      for (std::size_t i = 0; i < synth_count; ++i) {
        scenes[i] = synth_scene(scene_seed(g.seed, i));
        scenes[i].id = scene_id(i);
      }
      write_dataset(synth_out, scenes);
      log("wrote " + std::to_string(synth_count) + " scenes to " + synth_out);
    } else if (splitc->parsed()) {
      const auto manifest = split(read_manifest(split_dataset), split_count, g.seed, split_tag);
      write_manifest(split_dataset, manifest);
      log("retagged " + std::to_string(split_count) + " scenes as " + split_tag);
    } else if (sample->parsed()) {
      sp.seed = g.seed;
      sp.validate();
      const auto dataset = load_dataset(sample_dataset);
      auto scenes = sample_split == "all" ? dataset.scenes : dataset.select(sample_split);
      if (sample_flip) scenes = with_flips(scenes);
      std::vector<std::pair<std::size_t, std::size_t>> jobs;
      for (std::size_t s = 0; s < scenes.size(); ++s)
        for (std::size_t k = 0; k < scenes[s].instances.size(); ++k) jobs.emplace_back(s, k);
      std::vector<std::vector<TrainingPair>> results(jobs.size());
      std::vector<std::string> problems(jobs.size());
#pragma omp parallel for schedule(dynamic)
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto [s, k] = jobs[j];
        try {
          results[j] = generate_pairs(scenes[s], k, sp);
          for (const auto& pair : results[j]) {
            const auto v = check_pair(scenes[s], k, pair, sp);
            if (!v.empty()) {
              problems[j] = pair.source_id + ": " + v.front();
              break;
            }
          }
        } catch (const std::exception& e) {
          problems[j] = e.what();
        }
      }
      for (const auto& p : problems)
        if (!p.empty()) fail(ErrorCode::corrupt_data, "sampling failed: " + p);
      std::vector<PairRecord> records;
      for (std::size_t j = 0; j < jobs.size(); ++j)
        for (auto& pair : results[j])
          records.push_back({scenes[jobs[j].first].id, jobs[j].second, std::move(pair)});
      write_pairs(sample_out, scenes, records, sp);
      log("wrote " + std::to_string(records.size()) + " pairs to " + sample_out);
    } else if (trainc->parsed()) {
      tc.seed = g.seed;
      tc.validate();
      const auto records = read_pairs(train_pairs);
      std::vector<TrainingPair> pairs;
      pairs.reserve(records.size());
      for (const auto& r : records) pairs.push_back(r.pair);
      auto model = ReferenceModel::initialized(g.seed);
      const auto history = train(model, pairs, tc, [&](int epoch, double loss) {
        log("epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss));
      });
      save_model(model, train_model_out);
      if (train_history.empty()) train_history = train_model_out + ".history.json";
      write_json(train_history, {{"loss", history},
                                 {"pairs", pairs.size()},
                                 {"config",
                                  {{"learning_rate", tc.learning_rate},
                                   {"momentum", tc.momentum},
                                   {"epochs", tc.epochs},
                                   {"batch_size", tc.batch_size},
                                   {"seed", tc.seed}}}});
    } else if (segment->parsed()) {
      const auto params = seg_energy.params();
      const auto backend = load_backend(seg_model);
      const Image image = load_image(seg_image);
      const ClickSet clicks = read_clicks_arg(seg_clicks);
      clicks.check_bounds(image.height(), image.width());
      BinaryMask mask(image.height(), image.width());
      if (!clicks.empty()) {
        const auto q = predict_clicks(*backend, image, clicks);
        if (!seg_prob.empty()) {
          Image gray(q.height(), q.width());
          for (int r = 0; r < q.height(); ++r)
            for (int c = 0; c < q.width(); ++c)
              for (int ch = 0; ch < 3; ++ch)
                gray.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(q(r, c) * 255.0f));
          save_image(gray, seg_prob);
        }
        if (!seg_dump.empty()) {
          std::ofstream dump(seg_dump);
          if (!dump) fail(ErrorCode::io_failure, "cannot write " + seg_dump);
          dump_graph(build_energy(image, q, clicks, params), dump);
        }
        mask = seg_energy.no_graphcut ? q.threshold(0.5f) : refine(image, q, clicks, params);
      }
      save_mask(mask, seg_out);
      log("wrote " + seg_out);
    } else if (evaluate->parsed()) {
      const auto thresholds = parse_list(ev_thresholds, "--thresholds");
      for (double t : thresholds)
        if (!(t > 0.0 && t <= 1.0)) fail(ErrorCode::invalid_argument, "thresholds must lie in (0, 1]");
      const auto params = ev_energy.params();
      const auto dataset = load_dataset(ev_dataset);
      const auto scenes = ev_split == "all" ? dataset.scenes : dataset.select(ev_split);
      Segmenter seg;
      std::string method;
      if (ev_oracle) {
        seg = oracle_segmenter(scenes);
        method = "oracle";
      } else {
        if (ev_model.empty()) fail(ErrorCode::invalid_argument, "--model is required");
        seg = make_segmenter(load_backend(ev_model), params, !ev_energy.no_graphcut);
        method = ev_energy.no_graphcut ? "threshold" : "graphcut";
      }
      auto report = evaluate_dataset(seg, scenes, thresholds, ev_max_clicks);
      report.method = method;
      report.dataset = ev_dataset + ":" + ev_split;
      report.config = ev_energy.to_json();
      report.config["model"] = ev_model;
      write_json(ev_out + ".json", report_to_json(report));
      write_text(ev_out + ".txt", report_table(report));
      write_text(ev_out + ".csv", report_curve_csv(report));
      out << report_table(report);
    } else if (tune->parsed()) {
      const auto lambdas = parse_list(tu_lambdas, "--lambdas");
      const auto thresholds = parse_list(tu_thresholds, "--thresholds");
      const auto params = tu_energy.params();
      const auto dataset = load_dataset(tu_dataset);
      const auto scenes = dataset.select(tu_split);
      const auto choice =
          select_lambda(load_backend(tu_model), params, lambdas, scenes, thresholds, tu_max_clicks);
      if (!tu_out.empty()) {
        json trials = json::array();
        for (const auto& [lambda, report] : choice.trials)
          trials.push_back({{"lambda", lambda}, {"report", report_to_json(report)}});
        write_json(tu_out, {{"lambda", choice.lambda}, {"trials", trials}});
      }
      out << choice.lambda << "\n";
    } else if (serve->parsed()) {
      sc.energy = sv_energy.params();
      sc.use_graphcut = !sv_energy.no_graphcut;
      sc.session_ttl = std::chrono::seconds(sv_ttl);
      sc.static_dir = sv_static;
      SegService service(load_backend(sv_model), sc);
      err << "listening on " << sc.host << ":" << sc.port << std::endl;
      if (!service.listen()) fail(ErrorCode::io_failure, "cannot listen on port " + std::to_string(sc.port));
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
  return 0;
}

}  // namespace clicksel::cli
