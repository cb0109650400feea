#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clicksel/click_sampling.hpp"
#include "clicksel/scene.hpp"

namespace clicksel {

// Layout under a dataset root:
//   manifest.json
//   images/<id>.png
//   masks/<id>/<k>.png      one binary PNG per instance

inline constexpr int kManifestVersion = 1;

struct ManifestEntry {
  std::string id;
  std::string image;
  std::vector<std::string> masks;
  std::string split = "train";

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  int format_version = kManifestVersion;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

DatasetManifest read_manifest(const std::filesystem::path& root);
void write_manifest(const std::filesystem::path& root, const DatasetManifest& manifest);

/// Writes scenes (images, masks, manifest). `splits` may be empty (all train).
DatasetManifest write_dataset(const std::filesystem::path& root,
                              std::span<const InstanceScene> scenes,
                              std::span<const std::string> splits = {});

struct Dataset {
  DatasetManifest manifest;
  std::vector<InstanceScene> scenes;

  /// Scenes whose manifest entry carries `split`, in manifest order.
  std::vector<InstanceScene> select(const std::string& split) const;
};

/// Decodes and validates every entry, in manifest order.
Dataset load_dataset(const std::filesystem::path& root);

/// Retags `count` train entries, chosen uniformly with `seed`, as `tag`.
DatasetManifest split(const DatasetManifest& manifest, std::size_t count, std::uint64_t seed,
                      const std::string& tag = "val");

/// Appends the horizontal mirror of every scene (id suffixed "_flip").
std::vector<InstanceScene> with_flips(std::span<const InstanceScene> scenes);

// Training pairs under a directory:
//   manifest.json           pair list with strategy_used / source_id audit fields
//   images/<scene>.png
//   masks/<scene>/<k>.png
//   clicks/<pair>.json      {"positives": [{row, col}], "negatives": [...]}

struct PairRecord {
  std::string scene_id;
  std::size_t instance = 0;
  TrainingPair pair;
};

void write_pairs(const std::filesystem::path& dir, std::span<const InstanceScene> scenes,
                 std::span<const PairRecord> pairs, const SamplingParams& params);
std::vector<PairRecord> read_pairs(const std::filesystem::path& dir);

}  // namespace clicksel
