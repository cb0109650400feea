#include "clicksel/model.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include <nlohmann/json.hpp>

#include "clicksel/image_io.hpp"

namespace clicksel {

namespace {

constexpr std::size_t kLayerCount = kReferenceLayers.size();

constexpr std::size_t layer_weight_count(std::size_t l) {
  return static_cast<std::size_t>(kReferenceLayers[l].in_channels) *
         kReferenceLayers[l].out_channels * 9;
}

constexpr std::size_t total_parameters() {
  std::size_t n = 0;
  for (std::size_t l = 0; l < kLayerCount; ++l)
    n += layer_weight_count(l) + static_cast<std::size_t>(kReferenceLayers[l].out_channels);
  return n;
}

kernels::ConvShape layer_shape(std::size_t l, int height, int width) {
  return {kReferenceLayers[l].in_channels, kReferenceLayers[l].out_channels, height, width,
          kReferenceLayers[l].dilation};
}

template <typename T>
T logistic(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

template <typename T>
void check_input(const InteractionTensor& input) {
  if (input.planes != InteractionTensor::kPlanes)
    fail(ErrorCode::dimension_mismatch,
         "model expects 5 input planes, got " + std::to_string(input.planes));
  const auto expected = static_cast<std::size_t>(input.height) * input.width * input.planes;
  if (input.data.size() != expected)
    fail(ErrorCode::dimension_mismatch, "interaction tensor buffer has the wrong size");
}

// Runs all layers; leaves logits in ws.activations.back().
template <typename T>
void run_layers(const BasicModel<T>& model, const InteractionTensor& input, ModelWorkspace<T>& ws) {
  check_input<T>(input);
  const int h = input.height;
  const int w = input.width;
  ws.activations[0].assign(input.data.begin(), input.data.end());
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto shape = layer_shape(l, h, w);
    auto& z = ws.preactivations[l];
    z.resize(shape.output_size());
    kernels::conv2d_forward<T>(shape, ws.activations[l], model.weights(l), model.bias(l), z,
                               ws.conv[l]);
    auto& a = ws.activations[l + 1];
    if (l + 1 < kLayerCount) {
      a.resize(z.size());
      std::transform(z.begin(), z.end(), a.begin(), [](T v) { return v > T(0) ? v : T(0); });
    } else {
      a = z;
    }
  }
}

}  // namespace

template <typename T>
BasicModel<T>::BasicModel() : params_(total_parameters(), T(0)) {}

template <typename T>
BasicModel<T> BasicModel<T>::initialized(std::uint64_t seed) {
  BasicModel model;
  Rng rng(seed);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const double fan_in = kReferenceLayers[l].in_channels * 9.0;
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto* w = model.params_.data() + weight_offset(l);
    for (std::size_t i = 0; i < layer_weight_count(l); ++i) w[i] = static_cast<T>(dist(rng));
  }
  return model;
}

template <typename T>
std::size_t BasicModel<T>::weight_offset(std::size_t layer) {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l)
    off += layer_weight_count(l) + static_cast<std::size_t>(kReferenceLayers[l].out_channels);
  return off;
}

template <typename T>
std::size_t BasicModel<T>::bias_offset(std::size_t layer) {
  return weight_offset(layer) + layer_weight_count(layer);
}

template <typename T>
std::span<const T> BasicModel<T>::weights(std::size_t layer) const {
  return std::span<const T>(params_).subspan(weight_offset(layer), layer_weight_count(layer));
}

template <typename T>
std::span<const T> BasicModel<T>::bias(std::size_t layer) const {
  return std::span<const T>(params_).subspan(
      bias_offset(layer), static_cast<std::size_t>(kReferenceLayers[layer].out_channels));
}

template <typename T>
ProbabilityMap forward(const BasicModel<T>& model, const InteractionTensor& input,
                       ModelWorkspace<T>& ws) {
  run_layers(model, input, ws);
  ProbabilityMap q(input.height, input.width);
  const auto& logits = ws.activations.back();
  const auto lo = static_cast<float>(kProbabilityClamp);
  const auto hi = static_cast<float>(1.0 - kProbabilityClamp);
  for (std::size_t i = 0; i < logits.size(); ++i)
    q.values()[i] = std::clamp(static_cast<float>(logistic(logits[i])), lo, hi);
  return q;
}

template <typename T>
ProbabilityMap forward(const BasicModel<T>& model, const InteractionTensor& input) {
  ModelWorkspace<T> ws;
  return forward(model, input, ws);
}

template <typename T>
double loss(const BasicModel<T>& model, const InteractionTensor& input, const BinaryMask& target,
            ModelWorkspace<T>& ws) {
  if (!target.same_shape(input.height, input.width))
    fail(ErrorCode::dimension_mismatch, "target mask does not match the input size");
  run_layers(model, input, ws);
  const auto& logits = ws.activations.back();
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double y = target.values()[i] ? 1.0 : 0.0;
    const double qc = std::clamp(logistic(static_cast<double>(logits[i])), kProbabilityClamp,
                                 1.0 - kProbabilityClamp);
    sum -= y * std::log(qc) + (1.0 - y) * std::log(1.0 - qc);
  }
  return sum / static_cast<double>(logits.size());
}

template <typename T>
double loss_and_gradient(const BasicModel<T>& model, const InteractionTensor& input,
                         const BinaryMask& target, std::span<T> gradient, ModelWorkspace<T>& ws) {
  if (!target.same_shape(input.height, input.width))
    fail(ErrorCode::dimension_mismatch, "target mask does not match the input size");
  if (gradient.size() != model.parameter_count())
    fail(ErrorCode::dimension_mismatch, "gradient buffer has the wrong size");
  run_layers(model, input, ws);

  const int h = input.height;
  const int w = input.width;
  const auto n = static_cast<std::size_t>(h) * w;
  const auto& logits = ws.activations.back();
  auto& grad = ws.grad_a;
  grad.assign(n, T(0));
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = target.values()[i] ? 1.0 : 0.0;
    const double q = logistic(static_cast<double>(logits[i]));
    const double qc = std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
    loss -= y * std::log(qc) + (1.0 - y) * std::log(1.0 - qc);
    // The clamp is flat outside its range, so the derivative vanishes there.
    if (q > kProbabilityClamp && q < 1.0 - kProbabilityClamp)
      grad[i] = static_cast<T>((q - y) / static_cast<double>(n));
  }
  loss /= static_cast<double>(n);

  std::fill(gradient.begin(), gradient.end(), T(0));
  for (std::size_t l = kLayerCount; l-- > 0;) {
    const auto shape = layer_shape(l, h, w);
    auto gw = gradient.subspan(BasicModel<T>::weight_offset(l), shape.weight_size());
    auto gb = gradient.subspan(BasicModel<T>::bias_offset(l),
                               static_cast<std::size_t>(shape.out_channels));
    std::span<T> gin;
    if (l > 0) {
      ws.grad_b.resize(shape.input_size());
      gin = ws.grad_b;
    }
    kernels::conv2d_backward<T>(shape, model.weights(l), grad, gin, gw, gb, ws.conv[l]);
    if (l > 0) {
      const auto& z = ws.preactivations[l - 1];
      for (std::size_t i = 0; i < gin.size(); ++i)
        if (!(z[i] > T(0))) gin[i] = T(0);
      std::swap(ws.grad_a, ws.grad_b);
    }
  }
  return loss;
}

template <typename T>
LossGradient<T> loss_and_gradient(const BasicModel<T>& model, const InteractionTensor& input,
                                  const BinaryMask& target) {
  LossGradient<T> out;
  out.gradient.resize(model.parameter_count());
  ModelWorkspace<T> ws;
  out.loss = loss_and_gradient(model, input, target, std::span<T>(out.gradient), ws);
  return out;
}

template <typename T>
double min_abs_preactivation(const BasicModel<T>& model, const InteractionTensor& input) {
  ModelWorkspace<T> ws;
  run_layers(model, input, ws);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < kLayerCount; ++l)
    for (const T v : ws.preactivations[l]) best = std::min(best, std::abs(static_cast<double>(v)));
  return best;
}

template class BasicModel<float>;
template class BasicModel<double>;

#define CLICKSEL_INSTANTIATE_MODEL(T)                                                          \
  template ProbabilityMap forward<T>(const BasicModel<T>&, const InteractionTensor&);          \
  template ProbabilityMap forward<T>(const BasicModel<T>&, const InteractionTensor&,           \
                                     ModelWorkspace<T>&);                                      \
  template LossGradient<T> loss_and_gradient<T>(const BasicModel<T>&, const InteractionTensor&, \
                                                const BinaryMask&);                            \
  template double loss_and_gradient<T>(const BasicModel<T>&, const InteractionTensor&,         \
                                       const BinaryMask&, std::span<T>, ModelWorkspace<T>&);   \
  template double loss<T>(const BasicModel<T>&, const InteractionTensor&, const BinaryMask&,   \
                          ModelWorkspace<T>&);                                                 \
  template double min_abs_preactivation<T>(const BasicModel<T>&, const InteractionTensor&);

CLICKSEL_INSTANTIATE_MODEL(float)
CLICKSEL_INSTANTIATE_MODEL(double)

#undef CLICKSEL_INSTANTIATE_MODEL

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) fail(ErrorCode::invalid_argument, "learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    fail(ErrorCode::invalid_argument, "momentum must be in [0, 1)");
  if (epochs < 1) fail(ErrorCode::invalid_argument, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorCode::invalid_argument, "batch size must be >= 1");
}

std::vector<double> train(ReferenceModel& model, std::span<const TrainingPair> pairs,
                          const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (pairs.empty()) fail(ErrorCode::empty_input, "train: no training pairs");
  for (const auto& p : pairs)
    if (!p.image) fail(ErrorCode::invalid_argument, "train: pair " + p.source_id + " has no image");

  const std::size_t n_params = model.parameter_count();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<float> item_grads(batch * n_params);
  std::vector<double> item_loss(batch);
  std::vector<float> velocity(n_params, 0.0f);
  std::vector<float> step(n_params);
  std::vector<ModelWorkspace<float>> workspaces(static_cast<std::size_t>(omp_get_max_threads()));

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  std::vector<double> history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::size_t k = 0; k < count; ++k) {
        const auto& pair = pairs[order[start + k]];
        auto& ws = workspaces[static_cast<std::size_t>(omp_get_thread_num())];
        const auto input = encode(*pair.image, pair.clicks);
        item_loss[k] = loss_and_gradient<float>(
            model, input, pair.target,
            std::span<float>(item_grads).subspan(k * n_params, n_params), ws);
      }
      // Fixed reduction order keeps training bit-reproducible for any thread count.
      std::fill(step.begin(), step.end(), 0.0f);
      for (std::size_t k = 0; k < count; ++k) {
        const float* g = item_grads.data() + k * n_params;
        for (std::size_t i = 0; i < n_params; ++i) step[i] += g[i];
        epoch_loss += item_loss[k];
      }
      const auto scale = static_cast<float>(config.learning_rate / static_cast<double>(count));
      const auto mu = static_cast<float>(config.momentum);
      auto params = model.parameters();
      for (std::size_t i = 0; i < n_params; ++i) {
        velocity[i] = mu * velocity[i] - scale * step[i];
        params[i] += velocity[i];
      }
    }
    history.push_back(epoch_loss / static_cast<double>(pairs.size()));
    if (on_epoch) on_epoch(epoch, history.back());
  }
  return history;
}

namespace {

constexpr char kModelMagic[8] = {'C', 'S', 'E', 'L', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kModelVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

template <typename V>
void put(std::vector<std::uint8_t>& out, V value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(V));
}

template <typename V>
V get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(V) > bytes.size()) fail(ErrorCode::corrupt_data, "model file truncated");
  V value;
  std::memcpy(&value, bytes.data() + pos, sizeof(V));
  pos += sizeof(V);
  return value;
}

}  // namespace

void save_model(const ReferenceModel& model, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out(std::begin(kModelMagic), std::end(kModelMagic));
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kLayerCount));
  for (const auto& layer : kReferenceLayers) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.in_channels));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out_channels));
    put<std::uint32_t>(out, 3);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.dilation));
  }
  put<std::uint64_t>(out, model.parameter_count());
  for (const float v : model.parameters()) put<float>(out, v);
  write_file(path, out);

  nlohmann::json sidecar;
  sidecar["format"] = "clicksel-model";
  sidecar["version"] = kModelVersion;
  sidecar["parameter_count"] = model.parameter_count();
  sidecar["scalar"] = "float32-le";
  sidecar["input_planes"] = InteractionTensor::kPlanes;
  sidecar["output"] = "logistic";
  for (const auto& layer : kReferenceLayers)
    sidecar["layers"].push_back({{"in", layer.in_channels},
                                 {"out", layer.out_channels},
                                 {"kernel", 3},
                                 {"dilation", layer.dilation},
                                 {"padding", layer.dilation}});
  auto sidecar_path = path;
  sidecar_path += ".json";
  write_text(sidecar_path, sidecar.dump(2) + "\n");
}

ReferenceModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  std::span<const std::uint8_t> view(bytes);
  if (bytes.size() < sizeof kModelMagic ||
      std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0)
    fail(ErrorCode::unsupported_format, "not a clicksel model file: " + path.string());
  std::size_t pos = sizeof kModelMagic;
  if (get<std::uint32_t>(view, pos) != kModelVersion)
    fail(ErrorCode::unsupported_format, "unsupported model version");
  if (get<std::uint32_t>(view, pos) != kLayerCount)
    fail(ErrorCode::corrupt_data, "model layer count does not match the reference architecture");
  for (const auto& layer : kReferenceLayers) {
    const auto in = get<std::uint32_t>(view, pos);
    const auto out = get<std::uint32_t>(view, pos);
    const auto kernel = get<std::uint32_t>(view, pos);
    const auto dilation = get<std::uint32_t>(view, pos);
    if (in != static_cast<std::uint32_t>(layer.in_channels) ||
        out != static_cast<std::uint32_t>(layer.out_channels) || kernel != 3 ||
        dilation != static_cast<std::uint32_t>(layer.dilation))
      fail(ErrorCode::corrupt_data, "model layer shape does not match the reference architecture");
  }
  ReferenceModel model;
  if (get<std::uint64_t>(view, pos) != model.parameter_count())
    fail(ErrorCode::corrupt_data, "model parameter count mismatch");
  for (auto& v : model.parameters()) v = get<float>(view, pos);
  if (pos != bytes.size()) fail(ErrorCode::corrupt_data, "trailing bytes in model file");
  return model;
}

ProbabilityMap ReferenceBackend::predict(const InteractionTensor& input) const {
  thread_local ModelWorkspace<float> ws;
  return forward(model_, input, ws);
}

std::map<std::string, std::string> ReferenceBackend::metadata() const {
  return {{"parameters", std::to_string(model_.parameter_count())},
          {"layers", std::to_string(kLayerCount)},
          {"scalar", "float32"}};
}

}  // namespace clicksel
