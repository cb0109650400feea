#pragma once

#include <map>
#include <string>

#include "clicksel/click_encoding.hpp"
#include "clicksel/image.hpp"

namespace clicksel {

/// Anything that maps a five-plane interaction tensor to a same-sized
/// probability map. predict must be deterministic and safe to call
/// concurrently.
class ProbabilityBackend {
 public:
  virtual ~ProbabilityBackend() = default;

  virtual ProbabilityMap predict(const InteractionTensor& input) const = 0;
  virtual std::string name() const = 0;
  virtual std::map<std::string, std::string> metadata() const { return {}; }
};

}  // namespace clicksel
