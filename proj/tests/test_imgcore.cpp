#include <gtest/gtest.h>

#include <numeric>

#include "mavsir/imgcore.hpp"
#include "support.hpp"

using namespace mavsir;

TEST(Grayscale, BlackWhiteAndRed) {
  ColorFrame black(4, 3, 0.0), white(4, 3, 1.0);
  const Frame gb = to_grayscale(black), gw = to_grayscale(white);
  for (double v : gb.values()) EXPECT_EQ(v, 0.0);
  for (double v : gw.values()) EXPECT_NEAR(v, 1.0, 1e-15);
  ColorFrame c(2, 2);
  c.r()(1, 0) = 1.0;
  const Frame g = to_grayscale(c);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.299);
  EXPECT_EQ(g(0, 0), 0.0);
}

TEST(GaussianBlur, ConstantFrameUnchanged) {
  for (double sigma : {0.5, 1.0, 2.5}) {
    const Frame f = gaussian_blur(Frame(20, 13, 0.37), sigma);
    for (double v : f.values()) EXPECT_NEAR(v, 0.37, 1e-12);
  }
}

TEST(GaussianBlur, ImpulseCentreIsProductOfCentreWeights) {
  Frame f(21, 21);
  f(10, 10) = 1.0;
  const Frame b = gaussian_blur(f, 1.0);
  // Independent normalized kernel: exp(-k^2/2) over |k| <= 3.
  double s = 0.0;
  for (int k = -3; k <= 3; ++k) s += std::exp(-0.5 * k * k);
  const double w0 = 1.0 / s;
  EXPECT_NEAR(b(10, 10), w0 * w0, 1e-12);
  EXPECT_NEAR(std::accumulate(b.values().begin(), b.values().end(), 0.0), 1.0, 1e-6);
}

TEST(GaussianBlur, ShiftEquivariantAwayFromBorders) {
  Frame a(32, 32), b(32, 32);
  a(12, 14) = 1.0;
  b(15, 16) = 1.0;
  const Frame ba = gaussian_blur(a, 1.5), bb = gaussian_blur(b, 1.5);
  for (int y = 6; y < 22; ++y)
    for (int x = 6; x < 20; ++x) EXPECT_NEAR(ba(x, y), bb(x + 3, y + 2), 1e-15);
}

TEST(Pyramid, HalvingSizes) {
  const Pyramid p = build_pyramid(Frame(64, 64), 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].width(), 64);
  EXPECT_EQ(p[1].width(), 32);
  EXPECT_EQ(p[2].width(), 16);
  EXPECT_EQ(p[2].height(), 16);
}

TEST(Pyramid, SingleLevelIsInput) {
  Rng rng(3);
  const Frame f = testing_support::random_frame(9, 7, rng);
  const Pyramid p = build_pyramid(f, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], f);
}

TEST(Pyramid, OddSideRoundsUp) {
  const Pyramid p = build_pyramid(Frame(17, 17), 2);
  EXPECT_EQ(p[1].width(), 9);
  EXPECT_EQ(p[1].height(), 9);
}

TEST(Pyramid, EveryLevelIsCeilOfPrevious) {
  const Pyramid p = build_pyramid(Frame(77, 45), max_pyramid_levels(77, 45));
  for (std::size_t i = 1; i < p.size(); ++i) {
    EXPECT_EQ(p[i].width(), (p[i - 1].width() + 1) / 2);
    EXPECT_EQ(p[i].height(), (p[i - 1].height() + 1) / 2);
  }
}

TEST(Gradients, ConstantFrames) {
  const auto g = gradients(Frame(8, 8, 0.4), Frame(8, 8, 0.4));
  for (std::size_t i = 0; i < g.ix.size(); ++i) {
    EXPECT_EQ(g.ix[i], 0.0);
    EXPECT_EQ(g.iy[i], 0.0);
    EXPECT_EQ(g.it[i], 0.0);
  }
}

TEST(Gradients, PureTemporalStep) {
  const auto g = gradients(Frame(8, 8, 0.0), Frame(8, 8, 1.0));
  for (std::size_t i = 0; i < g.ix.size(); ++i) {
    EXPECT_EQ(g.ix[i], 0.0);
    EXPECT_EQ(g.iy[i], 0.0);
    EXPECT_EQ(g.it[i], 1.0);
  }
}

TEST(Gradients, HorizontalRamp) {
  const int W = 16;
  Frame f(W, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < W; ++x) f(x, y) = static_cast<double>(x) / W;
  const auto g = gradients(f, f);
  // Interior: every forward difference along x on the cube is 1/W.
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < W - 1; ++x) {
      EXPECT_NEAR(g.ix(x, y), 1.0 / W, 1e-15);
      EXPECT_NEAR(g.iy(x, y), 0.0, 1e-15);
      EXPECT_EQ(g.it(x, y), 0.0);
    }
}

TEST(Components, EmptyMask) { EXPECT_TRUE(connected_components(Mask(10, 10), 1).empty()); }

TEST(Components, FilledSquare) {
  Mask m(12, 12);
  for (int y = 3; y < 8; ++y)
    for (int x = 4; x < 9; ++x) m(x, y) = 1;
  const auto c = connected_components(m, 1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].area(), 25u);
  EXPECT_EQ(c[0].bbox, (BBox{4, 3, 5, 5}));
}

TEST(Components, DiagonalNeighboursJoin) {
  Mask m(4, 4);
  m(1, 1) = 1;
  m(2, 2) = 1;
  EXPECT_EQ(connected_components(m, 1).size(), 1u);
}

TEST(Components, PartitionTheMaskAndRespectMinArea) {
  Rng rng(17);
  Mask m(40, 30);
  for (auto& v : m.values()) v = rng.uniform() < 0.3;
  const auto all = connected_components(m, 1);
  std::vector<int> seen(m.size(), 0);
  std::size_t total = 0;
  for (const auto& c : all) {
    total += c.area();
    for (auto p : c.pixels) {
      EXPECT_TRUE(m[p]);
      ++seen[p];
    }
  }
  EXPECT_EQ(total, mask_count(m));
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_LE(seen[i], 1);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GE(all[i - 1].area(), all[i].area());
  for (const auto& c : connected_components(m, 5)) EXPECT_GE(c.area(), 5u);
}

TEST(Otsu, SplitsBimodalFrame) {
  Frame f(20, 20, 0.1);
  for (int y = 0; y < 20; ++y)
    for (int x = 10; x < 20; ++x) f(x, y) = 0.9;
  const double t = otsu_threshold(f);
  EXPECT_GT(t, 0.1);
  EXPECT_LT(t, 0.9);
}

TEST(ResizeBilinear, ConstantStaysConstant) {
  const Frame r = resize_bilinear(Frame(7, 5, 0.25), 13, 11);
  EXPECT_EQ(r.width(), 13);
  for (double v : r.values()) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Grid, RejectsEmptyDimensions) { EXPECT_THROW(Frame(0, 3), DataError); }
