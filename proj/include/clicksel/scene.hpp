#pragma once

#include <string>
#include <vector>

#include "clicksel/image.hpp"

namespace clicksel {

/// An image with pairwise-disjoint, nonempty object masks.
struct InstanceScene {
  std::string id;
  Image image;
  std::vector<BinaryMask> instances;

  /// Throws dimension_mismatch, empty_input or overlapping_instances.
  void validate() const;

  friend bool operator==(const InstanceScene&, const InstanceScene&) = default;
};

InstanceScene flip_augment(const InstanceScene& scene);

}  // namespace clicksel
