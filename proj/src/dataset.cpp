#include "clicksel/dataset.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "clicksel/click_io.hpp"
#include "clicksel/image_io.hpp"

namespace clicksel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool valid_split(const std::string& tag) { return tag == "train" || tag == "val" || tag == "test"; }

json parse_json_file(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::corrupt_data, path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_failure, "cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

DatasetManifest read_manifest(const fs::path& root) {
  const auto j = parse_json_file(root / "manifest.json");
  DatasetManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestVersion)
      fail(ErrorCode::unsupported_format,
           "manifest format version " + std::to_string(m.format_version) + " is not supported");
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      entry.image = e.at("image").get<std::string>();
      entry.masks = e.at("masks").get<std::vector<std::string>>();
      entry.split = e.value("split", std::string("train"));
      if (!valid_split(entry.split))
        fail(ErrorCode::corrupt_data, "entry " + entry.id + ": unknown split '" + entry.split + "'");
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::corrupt_data, "malformed manifest: " + std::string(e.what()));
  }
  return m;
}

void write_manifest(const fs::path& root, const DatasetManifest& manifest) {
  json j;
  j["format_version"] = manifest.format_version;
  j["entries"] = json::array();
  for (const auto& e : manifest.entries)
    j["entries"].push_back(
        {{"id", e.id}, {"image", e.image}, {"masks", e.masks}, {"split", e.split}});
  ensure_dir(root);
  write_text(root / "manifest.json", j.dump(2) + "\n");
}

DatasetManifest write_dataset(const fs::path& root, std::span<const InstanceScene> scenes,
                              std::span<const std::string> splits) {
  if (!splits.empty() && splits.size() != scenes.size())
    fail(ErrorCode::invalid_argument, "write_dataset: one split tag per scene required");
  ensure_dir(root / "images");
  DatasetManifest manifest;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& scene = scenes[i];
    ManifestEntry entry;
    entry.id = scene.id;
    entry.image = "images/" + scene.id + ".png";
    entry.split = splits.empty() ? "train" : splits[i];
    save_image(scene.image, root / entry.image);
    ensure_dir(root / "masks" / scene.id);
    for (std::size_t k = 0; k < scene.instances.size(); ++k) {
      entry.masks.push_back("masks/" + scene.id + "/" + std::to_string(k) + ".png");
      save_mask(scene.instances[k], root / entry.masks.back());
    }
    manifest.entries.push_back(std::move(entry));
  }
  write_manifest(root, manifest);
  return manifest;
}

std::vector<InstanceScene> Dataset::select(const std::string& tag) const {
  std::vector<InstanceScene> out;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    if (manifest.entries[i].split == tag) out.push_back(scenes[i]);
  return out;
}

Dataset load_dataset(const fs::path& root) {
  Dataset ds;
  ds.manifest = read_manifest(root);
  for (const auto& entry : ds.manifest.entries) {
    InstanceScene scene;
    scene.id = entry.id;
    scene.image = load_image(root / entry.image);
    for (const auto& mask_path : entry.masks) {
      auto mask = load_mask(root / mask_path);
      if (!mask.same_shape(scene.image.height(), scene.image.width()))
        fail(ErrorCode::dimension_mismatch,
             "scene " + entry.id + ": mask " + mask_path + " does not match the image size");
      scene.instances.push_back(std::move(mask));
    }
    scene.validate();
    ds.scenes.push_back(std::move(scene));
  }
  return ds;
}

DatasetManifest split(const DatasetManifest& manifest, std::size_t count, std::uint64_t seed,
                      const std::string& tag) {
  if (!valid_split(tag)) fail(ErrorCode::invalid_argument, "unknown split tag '" + tag + "'");
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].split == "train") train.push_back(i);
  if (count == 0) return manifest;
  if (count >= train.size())
    fail(ErrorCode::invalid_argument, "cannot move " + std::to_string(count) + " of " +
                                          std::to_string(train.size()) + " train entries");
  Rng rng(seed);
  std::shuffle(train.begin(), train.end(), rng);
  auto out = manifest;
  for (std::size_t k = 0; k < count; ++k) out.entries[train[k]].split = tag;
  return out;
}

std::vector<InstanceScene> with_flips(std::span<const InstanceScene> scenes) {
  std::vector<InstanceScene> out(scenes.begin(), scenes.end());
  for (const auto& s : scenes) {
    auto flipped = flip_augment(s);
    flipped.id += "_flip";
    out.push_back(std::move(flipped));
  }
  return out;
}

void write_pairs(const fs::path& dir, std::span<const InstanceScene> scenes,
                 std::span<const PairRecord> pairs, const SamplingParams& params) {
  ensure_dir(dir / "images");
  ensure_dir(dir / "clicks");
  for (const auto& scene : scenes) {
    save_image(scene.image, dir / "images" / (scene.id + ".png"));
    ensure_dir(dir / "masks" / scene.id);
    for (std::size_t k = 0; k < scene.instances.size(); ++k)
      save_mask(scene.instances[k], dir / "masks" / scene.id / (std::to_string(k) + ".png"));
  }
  json manifest;
  manifest["format_version"] = kManifestVersion;
  manifest["kind"] = "clicksel-pairs";
  manifest["params"] = {{"d", params.d},           {"n_pos", params.n_pos},
                        {"n_neg1", params.n_neg1}, {"n_neg2", params.n_neg2},
                        {"n_neg3", params.n_neg3}, {"n_pairs", params.n_pairs},
                        {"d_step", params.d_step}, {"d_margin", params.d_margin},
                        {"seed", params.seed}};
  manifest["pairs"] = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& rec = pairs[i];
    char name[32];
    std::snprintf(name, sizeof name, "pair_%06zu", i);
    const std::string clicks_path = std::string("clicks/") + name + ".json";
    write_text(dir / clicks_path, clicks_to_json(rec.pair.clicks).dump() + "\n");
    manifest["pairs"].push_back(
        {{"id", name},
         {"scene", rec.scene_id},
         {"instance", rec.instance},
         {"source_id", rec.pair.source_id},
         {"strategy_used", rec.pair.strategy_used},
         {"relaxed", rec.pair.relaxed},
         {"image", "images/" + rec.scene_id + ".png"},
         {"mask", "masks/" + rec.scene_id + "/" + std::to_string(rec.instance) + ".png"},
         {"clicks", clicks_path}});
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<PairRecord> read_pairs(const fs::path& dir) {
  const auto manifest = parse_json_file(dir / "manifest.json");
  std::map<std::string, std::shared_ptr<const Image>> images;
  std::map<std::string, BinaryMask> masks;
  std::vector<PairRecord> out;
  try {
    if (manifest.value("kind", std::string()) != "clicksel-pairs")
      fail(ErrorCode::unsupported_format, dir.string() + " is not a pairs directory");
    for (const auto& p : manifest.at("pairs")) {
      PairRecord rec;
      rec.scene_id = p.at("scene").get<std::string>();
      rec.instance = p.at("instance").get<std::size_t>();
      rec.pair.source_id = p.at("source_id").get<std::string>();
      rec.pair.strategy_used = p.at("strategy_used").get<int>();
      rec.pair.relaxed = p.value("relaxed", false);
      const auto image_path = p.at("image").get<std::string>();
      auto& image = images[image_path];
      if (!image) image = std::make_shared<const Image>(load_image(dir / image_path));
      rec.pair.image = image;
      const auto mask_path = p.at("mask").get<std::string>();
      auto it = masks.find(mask_path);
      if (it == masks.end()) it = masks.emplace(mask_path, load_mask(dir / mask_path)).first;
      rec.pair.target = it->second;
      rec.pair.clicks = clicks_from_json(parse_json_file(dir / p.at("clicks").get<std::string>()));
      out.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::corrupt_data, "malformed pairs manifest: " + std::string(e.what()));
  }
  return out;
}

}  // namespace clicksel
