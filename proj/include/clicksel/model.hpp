#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "clicksel/backend.hpp"
#include "clicksel/click_sampling.hpp"
#include "clicksel/kernels/conv.hpp"

namespace clicksel {

struct LayerSpec {
  int in_channels;
  int out_channels;
  int dilation;
};

/// 3×3 convolutions with rectifiers in between and a logistic output.
inline constexpr std::array<LayerSpec, 5> kReferenceLayers = {{
    {5, 16, 1},
    {16, 32, 2},
    {32, 32, 4},
    {32, 16, 1},
    {16, 1, 1},
}};

/// Outputs are kept inside [kProbabilityClamp, 1 - kProbabilityClamp].
inline constexpr double kProbabilityClamp = 1e-7;

/// Parameters of the reference network, stored flat: per layer the weights
/// ([out][in][3][3]) followed by the biases.
template <typename T>
class BasicModel {
 public:
  BasicModel();

  /// Centered uniform init, bound sqrt(6 / fan_in); biases zero.
  static BasicModel initialized(std::uint64_t seed);

  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }

  std::span<const T> weights(std::size_t layer) const;
  std::span<const T> bias(std::size_t layer) const;
  static std::size_t weight_offset(std::size_t layer);
  static std::size_t bias_offset(std::size_t layer);

  template <typename U>
  BasicModel<U> cast() const {
    BasicModel<U> out;
    for (std::size_t i = 0; i < params_.size(); ++i)
      out.parameters()[i] = static_cast<U>(params_[i]);
    return out;
  }

  friend bool operator==(const BasicModel&, const BasicModel&) = default;

 private:
  std::vector<T> params_;
};

using ReferenceModel = BasicModel<float>;

/// Reusable activation and im2col buffers for one thread.
template <typename T>
struct ModelWorkspace {
  std::array<std::vector<T>, kReferenceLayers.size() + 1> activations;
  std::array<std::vector<T>, kReferenceLayers.size()> preactivations;
  std::array<kernels::ConvWorkspace<T>, kReferenceLayers.size()> conv;
  std::vector<T> grad_a;
  std::vector<T> grad_b;
};

template <typename T>
ProbabilityMap forward(const BasicModel<T>& model, const InteractionTensor& input);

template <typename T>
ProbabilityMap forward(const BasicModel<T>& model, const InteractionTensor& input,
                       ModelWorkspace<T>& ws);

template <typename T>
struct LossGradient {
  double loss = 0.0;
  std::vector<T> gradient;
};

/// Mean per-pixel binary cross-entropy with q clamped to [1e-7, 1 - 1e-7]
/// and its exact gradient with respect to every parameter.
template <typename T>
LossGradient<T> loss_and_gradient(const BasicModel<T>& model, const InteractionTensor& input,
                                  const BinaryMask& target);

template <typename T>
double loss_and_gradient(const BasicModel<T>& model, const InteractionTensor& input,
                         const BinaryMask& target, std::span<T> gradient, ModelWorkspace<T>& ws);

/// Loss only (same definition as loss_and_gradient).
template <typename T>
double loss(const BasicModel<T>& model, const InteractionTensor& input, const BinaryMask& target,
            ModelWorkspace<T>& ws);

/// Smallest |pre-activation| over all rectified units (for kink-free finite differences).
template <typename T>
double min_abs_preactivation(const BasicModel<T>& model, const InteractionTensor& input);

struct TrainConfig {
  double learning_rate = 0.02;
  double momentum = 0.9;
  int epochs = 20;
  int batch_size = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(int, double)>;

/// Mini-batch SGD with momentum. Returns the mean training loss per epoch.
std::vector<double> train(ReferenceModel& model, std::span<const TrainingPair> pairs,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Binary file plus a JSON sidecar at `path` + ".json".
void save_model(const ReferenceModel& model, const std::filesystem::path& path);
ReferenceModel load_model(const std::filesystem::path& path);

class ReferenceBackend : public ProbabilityBackend {
 public:
  explicit ReferenceBackend(ReferenceModel model) : model_(std::move(model)) {}

  ProbabilityMap predict(const InteractionTensor& input) const override;
  std::string name() const override { return "reference-cnn"; }
  std::map<std::string, std::string> metadata() const override;

  const ReferenceModel& model() const { return model_; }

 private:
  ReferenceModel model_;
};

}  // namespace clicksel
