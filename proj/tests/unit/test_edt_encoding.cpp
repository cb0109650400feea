#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "clicksel/click_encoding.hpp"
#include "clicksel/kernels/edt.hpp"
#include "oracles.hpp"

using namespace clicksel;

TEST(Edt, MatchesBruteForceSerialAndParallel) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 60; ++t) {
    const int h = 1 + static_cast<int>(rng() % 40), w = 1 + static_cast<int>(rng() % 40);
    BinaryMask seeds(h, w);
    const int n = static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) seeds(static_cast<int>(rng() % h), static_cast<int>(rng() % w)) = 1;
    const auto want = oracle::squared_distance(seeds);
    for (auto exec : {kernels::Exec::serial, kernels::Exec::parallel}) {
      const auto got = kernels::squared_edt(seeds, exec);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          if (want(r, c) < 0)
            ASSERT_EQ(got(r, c), kernels::kNoSeed);
          else
            ASSERT_EQ(got(r, c), want(r, c));
        }
    }
  }
}

TEST(Edt, FramedCountsTheBorder) {
  BinaryMask none(5, 7);
  const auto d = kernels::squared_edt_framed(none);
  EXPECT_EQ(d(0, 0), 1);
  EXPECT_EQ(d(2, 3), 9);  // three rows to the top frame
}

TEST(DistanceMap, HandExamples) {
  std::vector<Pixel> one{{3, 4}};
  const auto d = distance_map(one, 10, 10);
  EXPECT_EQ(d(3, 4), 0.0f);
  EXPECT_EQ(d(0, 0), 5.0f);
  const auto e = distance_map(std::vector<Pixel>{}, 6, 9);
  for (float v : e.values()) EXPECT_EQ(v, 255.0f);
}

TEST(DistanceMap, BruteForceAndTruncation) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<Pixel> pts;
    for (int k = 0; k < 3; ++k) pts.push_back({static_cast<int>(rng() % 32), static_cast<int>(rng() % 32)});
    EXPECT_EQ(distance_map(pts, 32, 32), oracle::distance_map(pts, 32, 32));
  }
  const auto far = distance_map(std::vector<Pixel>{{0, 0}}, 300, 300);
  EXPECT_EQ(far(299, 299), 255.0f);
  EXPECT_EQ(*std::max_element(far.values().begin(), far.values().end()), 255.0f);
}

TEST(DistanceMap, MonotoneInSourcesAndFlipEquivariant) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    std::vector<Pixel> a{{static_cast<int>(rng() % 20), static_cast<int>(rng() % 25)}};
    auto b = a;
    b.push_back({static_cast<int>(rng() % 20), static_cast<int>(rng() % 25)});
    const auto da = distance_map(a, 20, 25), db = distance_map(b, 20, 25);
    for (std::size_t i = 0; i < da.size(); ++i) EXPECT_LE(db.values()[i], da.values()[i]);
    std::vector<Pixel> fb;
    for (auto p : b) fb.push_back({p.row, 24 - p.col});
    const auto dfb = distance_map(fb, 20, 25);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 25; ++c) EXPECT_EQ(dfb(r, 24 - c), db(r, c));
  }
}

TEST(DistanceMap, OutOfBounds) {
  EXPECT_THROW(distance_map(std::vector<Pixel>{{5, 0}}, 5, 5), Error);
}

TEST(Encode, PlanesAndScaling) {
  std::mt19937_64 rng(14);
  const auto img = oracle::random_image(9, 11, rng);
  const auto t = encode(img, ClickSet{});
  ASSERT_EQ(t.data.size(), 5u * 9 * 11);
  for (float v : t.plane(3)) EXPECT_EQ(v, 1.0f);
  for (float v : t.plane(4)) EXPECT_EQ(v, 1.0f);
  EXPECT_EQ(t.plane(1)[2 * 11 + 3], img.at(2, 3, 1) / 255.0f);

  ClickSet one;
  one.add(4, 5, Polarity::positive);
  const auto u = encode(img, one);
  for (int i = 0; i < 99; ++i) {
    if (i == 4 * 11 + 5)
      EXPECT_EQ(u.plane(3)[static_cast<std::size_t>(i)], 0.0f);
    else
      EXPECT_GT(u.plane(3)[static_cast<std::size_t>(i)], 0.0f);
  }
  for (float v : u.data) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Encode, InvariantToWithinPolarityOrder) {
  std::mt19937_64 rng(15);
  const auto img = oracle::random_image(16, 16, rng);
  std::vector<Click> pos;
  for (int k = 0; k < 5; ++k) pos.push_back({static_cast<int>(rng() % 16), static_cast<int>(rng() % 16), Polarity::positive});
  ClickSet a, b;
  for (auto& c : pos) a.add(c);
  std::shuffle(pos.begin(), pos.end(), rng);
  for (auto& c : pos) b.add(c);
  a.add(0, 0, Polarity::negative);
  b.add(0, 0, Polarity::negative);
  EXPECT_EQ(encode(img, a), encode(img, b));
}

TEST(ClickSet, OrderDuplicatesAndUndo) {
  ClickSet s;
  EXPECT_TRUE(s.add(1, 2, Polarity::positive));
  EXPECT_TRUE(s.add(3, 4, Polarity::negative));
  EXPECT_FALSE(s.add(1, 2, Polarity::positive));
  EXPECT_TRUE(s.add(5, 6, Polarity::positive));
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.positives(), (std::vector<Pixel>{{1, 2}, {5, 6}}));
  EXPECT_EQ(s.negatives(), (std::vector<Pixel>{{3, 4}}));
  s.pop_back();
  EXPECT_EQ(s.sequence().back(), (Click{3, 4, Polarity::negative}));
  s.pop_back();
  s.pop_back();
  EXPECT_THROW(s.pop_back(), Error);
}
