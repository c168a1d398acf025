#include <gtest/gtest.h>

#include <numbers>

#include "mavsir/segment.hpp"
#include "support.hpp"

using namespace mavsir;

namespace {

SpeedMap speed_of(Frame f) { return SpeedMap{std::move(f), 0.0, 1.0}; }

LevelSet circle(int w, int h, double cx, double cy, double r) {
  LevelSet ls{Frame(w, h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) ls.u_grid(x, y) = std::hypot(x - cx, y - cy) - r;
  return ls;
}

}  // namespace

TEST(Heaviside, SymmetryAndDirac) {
  for (double eps : {0.1, 1.0, 3.0}) {
    EXPECT_DOUBLE_EQ(heaviside(0.0, eps), 0.5);
    for (double z : {-5.0, -0.3, 0.7, 12.0}) EXPECT_NEAR(heaviside(z, eps) + heaviside(-z, eps), 1.0, 1e-15);
    EXPECT_NEAR(dirac(0.0, eps), 1.0 / (std::numbers::pi * eps), 1e-15);
  }
  EXPECT_NEAR(dirac(0.0, 1.0), 0.31831, 1e-5);
  // Inside is U < 0.
  EXPECT_GT(heaviside(-3.0, 1.0), 0.5);
}

TEST(Heaviside, DiracIsDerivativeMagnitude) {
  for (double z : {-2.0, -0.1, 0.4, 3.0}) {
    const double h = 1e-6;
    const double num = (heaviside(z + h, 1.0) - heaviside(z - h, 1.0)) / (2 * h);
    EXPECT_NEAR(-num, dirac(z, 1.0), 1e-8);
  }
}

TEST(RegionMeans, ConstantSpeed) {
  const auto s = region_means(speed_of(Frame(10, 10, 0.7)), checkerboard_level_set(10, 10), 1.0);
  EXPECT_NEAR(s.c1, 0.7, 1e-14);
  EXPECT_NEAR(s.c2, 0.7, 1e-14);
}

TEST(RegionMeans, SharpIndicatorLimit) {
  Frame sv(32, 32, 0.2);
  const LevelSet ls = circle(32, 32, 15.5, 15.5, 8.3);
  for (std::size_t i = 0; i < sv.size(); ++i)
    if (ls.u_grid[i] < 0) sv[i] = 0.9;
  const auto s = region_means(speed_of(sv), ls, 1e-4);
  EXPECT_NEAR(s.c1, 0.9, 1e-3);
  EXPECT_NEAR(s.c2, 0.2, 1e-3);
}

TEST(RegionMeans, MatchesBruteForceSums) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Frame sv = testing_support::random_frame(8, 8, rng);
    LevelSet ls{Frame(8, 8)};
    for (auto& v : ls.u_grid.values()) v = rng.uniform(-3, 3);
    const double eps = 0.8;
    long double ni = 0, di = 0, no = 0, dout = 0;
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const long double h = 0.5L - std::atan(static_cast<long double>(ls.u_grid(x, y)) / eps) / std::numbers::pi_v<long double>;
        ni += sv(x, y) * h;
        di += h;
        no += sv(x, y) * (1 - h);
        dout += 1 - h;
      }
    const auto s = region_means(speed_of(sv), ls, eps);
    EXPECT_NEAR(s.c1, static_cast<double>(ni / di), 1e-12);
    EXPECT_NEAR(s.c2, static_cast<double>(no / dout), 1e-12);
  }
}

TEST(RegionMeans, SignFlipSwapsMeans) {
  Rng rng(13);
  const Frame sv = testing_support::random_frame(12, 12, rng);
  LevelSet ls = checkerboard_level_set(12, 12, 1.3), neg = ls;
  for (auto& v : neg.u_grid.values()) v = -v;
  const auto a = region_means(speed_of(sv), ls, 1.0), b = region_means(speed_of(sv), neg, 1.0);
  EXPECT_NEAR(a.c1, b.c2, 1e-13);
  EXPECT_NEAR(a.c2, b.c1, 1e-13);
}

TEST(RegionMeans, MeansStayWithinSpeedRange) {
  Rng rng(21);
  const Frame sv = testing_support::random_frame(16, 16, rng);
  const auto s = region_means(speed_of(sv), checkerboard_level_set(16, 16), 1.0);
  const auto [mn, mx] = std::minmax_element(sv.values().begin(), sv.values().end());
  EXPECT_GE(s.c1, *mn);
  EXPECT_LE(s.c1, *mx);
  EXPECT_GE(s.c2, *mn);
  EXPECT_LE(s.c2, *mx);
}

TEST(Evolution, DataForceMatchesFormula) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform(), lam = rng.uniform(0.1, 3);
    const RegionStats st{rng.uniform(), rng.uniform()};
    const double ref = lam * ((s - st.c1) * (s - st.c1) - (s - st.c2) * (s - st.c2));
    EXPECT_NEAR(data_force(s, st, lam), ref, 1e-15);
    EXPECT_EQ(data_force(s, st, lam) > 0, ref > 0);
  }
}

TEST(Evolution, StepIsDiracTimesForce) {
  Rng rng(6);
  const Frame sv = testing_support::random_frame(10, 10, rng);
  const LevelSet ls = checkerboard_level_set(10, 10, 0.5);
  const RegionStats st = region_means(speed_of(sv), ls, 1.0);
  ChanVeseParams p;
  p.mu = 0.0;
  const LevelSet next = evolve_step(ls, speed_of(sv), st, p);
  for (std::size_t i = 0; i < sv.size(); ++i) {
    const double u = ls.u_grid[i];
    EXPECT_NEAR(next.u_grid[i], u + p.dt * dirac(u, 1.0) * data_force(sv[i], st, 1.0), 1e-15);
  }
}

TEST(Evolution, ConstantSpeedIsPureCurvatureFlowAndShrinksCircle) {
  const SpeedMap sv = speed_of(Frame(64, 64, 0.3));
  LevelSet ls = circle(64, 64, 31.5, 31.5, 20);
  ChanVeseParams p;
  p.mu = 10.0;
  std::vector<std::size_t> area{mask_count(ls.inside())};
  for (int i = 0; i < 100; ++i) {
    const RegionStats st = region_means(sv, ls, p.epsilon);
    EXPECT_NEAR(st.c1, st.c2, 1e-12);
    ls = evolve_step(ls, sv, st, p);
    area.push_back(mask_count(ls.inside()));
  }
  for (std::size_t i = 1; i < area.size(); ++i) EXPECT_LE(area[i], area[i - 1]);
  EXPECT_LT(area.back(), area.front());
}

TEST(Evolution, ConvergedBinaryConfigurationIsStationary) {
  const LevelSet ls = circle(32, 32, 15.5, 15.5, 8.3);
  Frame sv(32, 32, 0.1);
  for (std::size_t i = 0; i < sv.size(); ++i)
    if (ls.u_grid[i] < 0) sv[i] = 0.8;
  const RegionStats st{0.8, 0.1};
  ChanVeseParams p;
  p.mu = 0.0;
  const LevelSet next = evolve_step(ls, speed_of(sv), st, p);
  for (std::size_t i = 0; i < sv.size(); ++i) {
    EXPECT_EQ(next.u_grid[i] < 0, ls.u_grid[i] < 0);
    // Data force pushes each pixel deeper into its own region.
    EXPECT_GE(std::abs(next.u_grid[i]), std::abs(ls.u_grid[i]));
  }
}

TEST(Evolution, CurvatureOfCircleIsInverseRadius) {
  const LevelSet ls = circle(64, 64, 31.5, 31.5, 20);
  const Frame k = curvature(ls.u_grid);
  for (double r : {10.0, 15.0, 20.0}) {
    const int x = static_cast<int>(31.5 + r / std::numbers::sqrt2 + 0.5);
    const double rr = std::hypot(x - 31.5, x - 31.5);
    EXPECT_NEAR(k(x, x), 1.0 / rr, 0.15 / rr);
  }
}

TEST(Segment, ZeroSpeedMapGivesNearlyEmptyMask) {
  const auto r = segment_moving(speed_of(Frame(64, 64)), ChanVeseParams{});
  EXPECT_LT(mask_count(r.mask), 64u * 64u / 100u);
  EXPECT_TRUE(r.objects.empty());
}

TEST(Segment, InvariantToConstantOffset) {
  Frame sv(48, 48);
  for (int y = 14; y < 30; ++y)
    for (int x = 10; x < 26; ++x) sv(x, y) = 1.0;
  Frame shifted = sv;
  for (auto& v : shifted.values()) v += 0.25;
  const auto a = segment_moving(speed_of(sv), ChanVeseParams{});
  const auto b = segment_moving(speed_of(shifted), ChanVeseParams{});
  EXPECT_EQ(a.mask, b.mask);
}

TEST(Segment, EnergyNonIncreasingAndMovingPhaseInside) {
  Frame sv(48, 48, 0.05);
  for (int y = 8; y < 22; ++y)
    for (int x = 20; x < 34; ++x) sv(x, y) = 1.2;
  const auto r = segment_moving(speed_of(sv), ChanVeseParams{});
  for (std::size_t i = 1; i < r.energies.size(); ++i)
    EXPECT_LE(r.energies[i], r.energies[i - 1] + 1e-3 * std::abs(r.energies[i - 1]));
  EXPECT_GT(r.stats.c1, r.stats.c2);
  ASSERT_EQ(r.objects.size(), 1u);
  Mask truth(48, 48);
  for (int y = 8; y < 22; ++y)
    for (int x = 20; x < 34; ++x) truth(x, y) = 1;
  EXPECT_GE(mask_iou(r.mask, truth), 0.9);
}

TEST(Segment, MovingSquareThroughFlow) {
  Scene s;
  s.background_seed = 7;
  Mover m;
  m.x = 20;
  m.y = 24;
  m.w = m.h = 12;
  m.vx = 1;
  m.color = {0.9, 0.3, 0.2};
  s.movers = {m};
  const Frame a = to_grayscale(render(s, 0)), b = to_grayscale(render(s, 1));
  const auto sv = speed_map(horn_schunck_pyramidal(a, b, HsParams{}), 0.5, 1.5);
  const auto r = segment_moving(sv, ChanVeseParams{});
  EXPECT_GE(mask_iou(r.mask, truth_mask(s, 0)), 0.8);
  EXPECT_EQ(r.objects.size(), 1u);
}

TEST(Segment, TwoBlobsGiveTwoComponents) {
  Scene s;
  s.background_seed = 3;
  Mover a;
  a.x = a.y = 8;
  a.w = a.h = 16;
  a.vx = 1;
  a.color = {0.9, 0.3, 0.2};
  Mover b = a;
  b.x = b.y = 38;
  b.vx = 0;
  b.vy = -1;
  b.color = {0.2, 0.8, 0.9};
  s.movers = {a, b};
  const Frame f0 = to_grayscale(render(s, 0)), f1 = to_grayscale(render(s, 1));
  const auto sv = speed_map(horn_schunck_pyramidal(f0, f1, HsParams{}), 0.5, 1.5);
  const auto r = segment_moving(sv, ChanVeseParams{});
  EXPECT_EQ(r.objects.size(), 2u);
}

TEST(Segment, ParamsValidated) {
  ChanVeseParams p;
  p.epsilon = 0;
  EXPECT_THROW(segment_moving(speed_of(Frame(8, 8)), p), ConfigError);
}
