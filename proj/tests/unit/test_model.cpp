#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <random>

#include "clicksel/model.hpp"
#include "clicksel/synth.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace clicksel;

namespace {

InteractionTensor random_input(int h, int w, std::mt19937_64& rng) {
  InteractionTensor t;
  t.height = h;
  t.width = w;
  t.data.resize(5u * h * w);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : t.data) v = u(rng);
  return t;
}

}  // namespace

TEST(Model, ParameterCountAndZeroWeights) {
  ReferenceModel zero;
  EXPECT_EQ(zero.parameter_count(), 736u + 4640u + 9248u + 4624u + 145u);
  std::mt19937_64 rng(1);
  const auto q = forward(zero, random_input(7, 9, rng));
  EXPECT_EQ(q.height(), 7);
  EXPECT_EQ(q.width(), 9);
  for (float v : q.values()) EXPECT_EQ(v, 0.5f);
}

TEST(Model, LossAtHalfIsLn2) {
  ReferenceModel zero;
  std::mt19937_64 rng(2);
  const auto in = random_input(6, 6, rng);
  const auto target = oracle::random_blob(6, 6, rng);
  EXPECT_NEAR(loss_and_gradient(zero, in, target).loss, std::log(2.0), 1e-12);
}

TEST(Model, ConfidentPredictionHasNearZeroLoss) {
  // a large positive output bias drives q to the upper clamp everywhere
  ReferenceModel m;
  m.parameters()[ReferenceModel::bias_offset(4)] = 50.0f;
  std::mt19937_64 rng(3);
  const auto in = random_input(4, 4, rng);
  const auto r = loss_and_gradient(m, in, BinaryMask(4, 4, 1));
  EXPECT_LT(r.loss, 1e-6);
  for (float g : r.gradient) EXPECT_EQ(g, 0.0f);
}

TEST(Model, DeterministicInitAndForward) {
  std::mt19937_64 rng(4);
  const auto in = random_input(12, 10, rng);
  EXPECT_EQ(ReferenceModel::initialized(5), ReferenceModel::initialized(5));
  EXPECT_FALSE(ReferenceModel::initialized(5) == ReferenceModel::initialized(6));
  EXPECT_EQ(forward(ReferenceModel::initialized(5), in), forward(ReferenceModel::initialized(5), in));
}

TEST(Model, TranslationEquivarianceAwayFromBorders) {
  const auto model = ReferenceModel::initialized(8).cast<double>();
  std::mt19937_64 rng(6);
  const int h = 40, w = 40, shift = 3, band = 9;
  const auto a = random_input(h, w, rng);
  InteractionTensor b = a;
  for (int p = 0; p < 5; ++p)
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const int sc = c - shift;
        b.data[static_cast<std::size_t>((p * h + r) * w + c)] =
            sc >= 0 ? a.data[static_cast<std::size_t>((p * h + r) * w + sc)] : 0.5f;
      }
  const auto qa = forward(model, a), qb = forward(model, b);
  for (int r = band; r < h - band; ++r)
    for (int c = band + shift; c < w - band; ++c) EXPECT_NEAR(qb(r, c), qa(r, c - shift), 1e-6);
}

TEST(Model, GradientMatchesFiniteDifferencesOnSampledParameters) {
  std::mt19937_64 rng(7);
  auto model = ReferenceModel::initialized(11).cast<double>();
  auto in = random_input(8, 8, rng);
  while (min_abs_preactivation(model, in) < 1e-3) in = random_input(8, 8, rng);
  const auto target = oracle::random_blob(8, 8, rng);
  const auto analytic = loss_and_gradient(model, in, target);
  ModelWorkspace<double> ws;
  const double h = 1e-4;
  for (std::size_t l = 0; l < kReferenceLayers.size(); ++l) {
    std::vector<std::size_t> idx{ReferenceModel::bias_offset(l), ReferenceModel::weight_offset(l)};
    for (int k = 0; k < 20; ++k)
      idx.push_back(ReferenceModel::weight_offset(l) + rng() % (ReferenceModel::bias_offset(l) - ReferenceModel::weight_offset(l)));
    for (std::size_t i : idx) {
      const double saved = model.parameters()[i];
      model.parameters()[i] = saved + h;
      const double up = loss(model, in, target, ws);
      model.parameters()[i] = saved - h;
      const double down = loss(model, in, target, ws);
      model.parameters()[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double a = analytic.gradient[i];
      EXPECT_LE(std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}), 1e-4) << "param " << i;
    }
  }
}

TEST(Model, ZeroLearningRateLeavesParametersUnchanged) {
  const auto scene = synth_scene(3);
  SamplingParams sp;
  sp.n_pairs = 1;
  const auto pairs = generate_pairs(scene, 0, sp);
  auto model = ReferenceModel::initialized(1);
  const auto before = model;
  TrainConfig tc;
  tc.learning_rate = 0.0;
  tc.epochs = 1;
  EXPECT_EQ(train(model, pairs, tc).size(), 1u);
  EXPECT_EQ(model, before);
}

TEST(Model, EmptyTrainingSetFails) {
  auto model = ReferenceModel::initialized(1);
  try {
    train(model, std::vector<TrainingPair>{}, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_input);
  }
}

TEST(Model, SameSeedSameBytesAndMemorization) {
  std::vector<TrainingPair> pairs;
  SamplingParams sp;
  sp.n_pairs = 1;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto scene = synth_scene(100 + s);
    // 16x16 crops keep the run short
    InstanceScene crop;
    crop.id = scene.id;
    crop.image = Image(16, 16);
    BinaryMask m(16, 16);
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) {
        for (int ch = 0; ch < 3; ++ch) crop.image.at(r, c, ch) = scene.image.at(24 + r, 24 + c, ch);
        m(r, c) = (r - 8) * (r - 8) + (c - 8) * (c - 8) < 25 + static_cast<int>(s);
      }
    crop.instances.push_back(m);
    auto p = generate_pairs(crop, 0, sp);
    pairs.push_back(p.front());
  }
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 2;
  tc.seed = 4;
  auto a = ReferenceModel::initialized(2);
  auto b = ReferenceModel::initialized(2);
  const auto ha = train(a, pairs, tc);
  train(b, pairs, tc);
  EXPECT_EQ(a, b);
  double best = ha.front();
  for (double v : ha) best = std::min(best, v);
  EXPECT_LT(best, 0.05);
}

TEST(Model, TrainingIgnoresBufferAlignment) {
  const auto scene = synth_scene(8);
  SamplingParams sp;
  sp.n_pairs = 2;
  const auto pairs = generate_pairs(scene, 0, sp);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 2;
  auto ref = ReferenceModel::initialized(5);
  train(ref, pairs, tc);
  std::vector<std::unique_ptr<char[]>> shims;
  for (std::size_t shift = 1; shift <= 7; ++shift) {
    // odd-sized live allocations move later buffers to other offsets
    shims.push_back(std::make_unique<char[]>(shift * 4 + 1));
    auto model = ReferenceModel::initialized(5);
    train(model, pairs, tc);
    EXPECT_EQ(model, ref) << "shift " << shift;
  }
}

TEST(Model, SaveLoadRoundTrip) {
  TempDir dir;
  const auto model = ReferenceModel::initialized(9);
  save_model(model, dir / "m.bin");
  EXPECT_EQ(load_model(dir / "m.bin"), model);
  EXPECT_TRUE(std::filesystem::exists(dir / "m.bin.json"));
  std::ofstream(dir / "bad.bin", std::ios::binary).write("nope", 4);
  try {
    load_model(dir / "bad.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_format);
  }
}

TEST(Backend, ContractHolds) {
  const ReferenceBackend backend(ReferenceModel::initialized(2));
  std::mt19937_64 rng(10);
  const auto in = random_input(13, 17, rng);
  const auto q = backend.predict(in);
  EXPECT_EQ(q.height(), 13);
  EXPECT_EQ(q.width(), 17);
  for (float v : q.values()) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
  EXPECT_EQ(backend.predict(in), q);
  EXPECT_EQ(backend.name(), "reference-cnn");
  InteractionTensor bad = in;
  bad.planes = 4;
  EXPECT_THROW(backend.predict(bad), Error);
}
