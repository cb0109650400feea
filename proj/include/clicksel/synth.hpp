#pragma once

#include <cstdint>

#include "clicksel/scene.hpp"

namespace clicksel {

inline constexpr int kSynthSize = 64;

/// 64×64 scene: smooth-noise background and one to three disjoint filled
/// shapes (ellipse, rectangle, triangle) with distinct mean colors. Every
/// shape's mean color differs from the background mean by at least 30 in
/// some channel. Deterministic per seed.
InstanceScene synth_scene(std::uint64_t seed);

}  // namespace clicksel
