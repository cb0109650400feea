#include "clicksel/scene.hpp"

namespace clicksel {

void InstanceScene::validate() const {
  if (image.empty()) fail(ErrorCode::empty_input, "scene " + id + ": empty image");
  BinaryMask covered(image.height(), image.width());
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& m = instances[k];
    if (!m.same_shape(image.height(), image.width()))
      fail(ErrorCode::dimension_mismatch,
           "scene " + id + ": instance " + std::to_string(k) + " does not match image size");
    if (m.count() == 0)
      fail(ErrorCode::empty_input, "scene " + id + ": instance " + std::to_string(k) + " is empty");
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.values()[i] && covered.values()[i])
        fail(ErrorCode::overlapping_instances,
             "scene " + id + ": instance " + std::to_string(k) + " overlaps an earlier instance");
      covered.values()[i] |= m.values()[i];
    }
  }
}

InstanceScene flip_augment(const InstanceScene& scene) {
  InstanceScene out;
  out.id = scene.id;
  out.image = flip_horizontal(scene.image);
  out.instances.reserve(scene.instances.size());
  for (const auto& m : scene.instances) out.instances.push_back(flip_horizontal(m));
  return out;
}

}  // namespace clicksel
