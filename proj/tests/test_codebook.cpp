#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "mavsir/codebook.hpp"
#include "mavsir/synth.hpp"

using namespace mavsir;

namespace {

constexpr auto kId = DescriptorId::WaveletEnergy;  // 10-d, small
constexpr int kDim = 10;

FeatureVector vec(std::vector<double> v, RegionClass r = RegionClass::KeyFrame) {
  return {kId, r, std::move(v)};
}

std::vector<FeatureVector> two_clouds(double gap, double spread, int per, Rng& rng) {
  std::vector<FeatureVector> out;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < per; ++i) {
      std::vector<double> v(kDim);
      for (int d = 0; d < kDim; ++d) v[d] = (d == 0 ? c * gap : 0.0) + spread * rng.uniform(-1, 1);
      out.push_back(vec(v));
    }
  return out;
}

}  // namespace

TEST(KMeans, SeparatedCloudsGetOneCentroidEach) {
  Rng rng(5);
  const double gap = 10.0, spread = 1.0;
  const auto xs = two_clouds(gap, spread, 50, rng);
  KMeansParams p;
  p.k = 2;
  const auto cb = train_codebook(xs, p);
  ASSERT_EQ(cb.k(), 2);
  EXPECT_EQ(cb.dim(), kDim);
  std::vector<double> first{cb.centroids[0][0], cb.centroids[1][0]};
  std::sort(first.begin(), first.end());
  EXPECT_LE(std::abs(first[0]), spread);
  EXPECT_LE(std::abs(first[1] - gap), spread);
  // Any split that mixes clouds costs at least (gap/2)^2 per misplaced point.
  EXPECT_LT(inertia(cb, xs), gap * gap * static_cast<double>(xs.size()) / 4.0);
  for (std::size_t i = 1; i < cb.inertia_history.size(); ++i)
    EXPECT_LE(cb.inertia_history[i], cb.inertia_history[i - 1] + 1e-12);
}

TEST(KMeans, KEqualToNGivesZeroInertia) {
  Rng rng(6);
  const auto xs = two_clouds(3, 1, 4, rng);
  KMeansParams p;
  p.k = static_cast<int>(xs.size());
  const auto cb = train_codebook(xs, p);
  EXPECT_NEAR(inertia(cb, xs), 0.0, 1e-20);
}

TEST(KMeans, DeterministicPerSeed) {
  Rng rng(7);
  const auto xs = two_clouds(2, 1, 40, rng);
  KMeansParams p;
  p.k = 5;
  p.seed = 99;
  const auto a = train_codebook(xs, p), b = train_codebook(xs, p);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(KMeans, Errors) {
  Rng rng(8);
  auto xs = two_clouds(2, 1, 2, rng);
  KMeansParams p;
  p.k = 5;
  EXPECT_THROW(train_codebook(xs, p), DataError);
  p.k = 2;
  xs[1].region = RegionClass::Inside;
  EXPECT_THROW(train_codebook(xs, p), DataError);
}

TEST(Assign, ExactCentroidAndTieBreak) {
  std::vector<std::vector<double>> c(5, std::vector<double>(kDim, 0.0));
  for (int i = 0; i < 5; ++i) c[i][0] = 10.0 * i;
  EXPECT_EQ(nearest_centroid(c, c[3]), 3);
  // Equidistant from 1 and 4 and farther from everything else.
  std::vector<double> x(kDim, 0.0);
  c[4] = c[1];
  c[4][1] = 2.0;
  x[0] = 10.0;
  x[1] = 1.0;
  EXPECT_EQ(nearest_centroid(c, x), 1);
}

TEST(Assign, MatchesBruteForce) {
  Rng rng(9);
  const auto xs = two_clouds(4, 2, 30, rng);
  KMeansParams p;
  p.k = 6;
  const auto cb = train_codebook(xs, p);
  const auto labels = assign_labels(cb, xs);
  ASSERT_EQ(labels.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double best = 1e300;
    int arg = -1;
    for (int c = 0; c < cb.k(); ++c) {
      double d = 0;
      for (int k = 0; k < kDim; ++k) d += (xs[i].values[k] - cb.centroids[c][k]) * (xs[i].values[k] - cb.centroids[c][k]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    EXPECT_EQ(labels[i], arg);
  }
}

namespace {

std::vector<Codebook> three_codebooks() {
  std::vector<Codebook> cbs;
  int k = 3;
  for (auto r : kAllRegions) {
    Codebook cb;
    cb.id = kId;
    cb.region = r;
    cb.centroids.assign(k++, std::vector<double>(kDim, 0.0));
    cbs.push_back(cb);
  }
  return cbs;
}

}  // namespace

TEST(Signature, OneFrameShotIsOneHotPerBlock) {
  const auto cbs = three_codebooks();  // k = 3, 4, 5
  LabelSequence seq{"s", {{cbs[0].channel(), {2}}, {cbs[1].channel(), {0}}, {cbs[2].channel(), {4}}}};
  const auto sig = shot_signature(seq, cbs);
  ASSERT_EQ(sig.values.size(), 12u);
  const std::vector<double> want{0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1};
  EXPECT_EQ(sig.values, want);
}

TEST(Signature, BlocksSumToOneAndIgnoreOrder) {
  const auto cbs = three_codebooks();
  LabelSequence a{"s", {{cbs[0].channel(), {0, 1, 1, 2, 2, 2}}, {cbs[2].channel(), {4, 0, 4}}}};
  LabelSequence b = a;
  std::reverse(b.labels[cbs[0].channel()].begin(), b.labels[cbs[0].channel()].end());
  std::rotate(b.labels[cbs[2].channel()].begin(), b.labels[cbs[2].channel()].begin() + 1,
              b.labels[cbs[2].channel()].end());
  const auto sa = shot_signature(a, cbs), sb = shot_signature(b, cbs);
  EXPECT_EQ(sa.values, sb.values);
  std::size_t off = 0;
  const double want_sum[] = {1.0, 0.0, 1.0};  // the Outside channel is absent
  for (int c = 0; c < 3; ++c) {
    double s = 0;
    for (int i = 0; i < cbs[c].k(); ++i) s += sa.values[off + i];
    EXPECT_NEAR(s, want_sum[c], 1e-12);
    off += cbs[c].k();
  }
  EXPECT_NEAR(sa.values[1], 2.0 / 6.0, 1e-15);
}

TEST(Signature, EmptyShotAndBadLabelThrow) {
  const auto cbs = three_codebooks();
  EXPECT_THROW(shot_signature(LabelSequence{"e", {}}, cbs), DataError);
  EXPECT_THROW(shot_signature(LabelSequence{"b", {{cbs[0].channel(), {3}}}}, cbs), DataError);
}

TEST(CodebookFile, RoundTrip) {
  Rng rng(10);
  const auto xs = two_clouds(3, 1, 10, rng);
  KMeansParams p;
  p.k = 4;
  const auto cb = train_codebook(xs, p);
  std::stringstream ss;
  write_codebook(ss, cb);
  EXPECT_EQ(ss.str().substr(0, 7), "MAVCB01");
  EXPECT_EQ(ss.str().size(), 7u + 16u + 8u * 4 * kDim);
  const auto back = read_codebook(ss);
  EXPECT_EQ(back.id, cb.id);
  EXPECT_EQ(back.region, cb.region);
  EXPECT_EQ(back.centroids, cb.centroids);

  std::stringstream bad("MAVCB02xxxxxxxxxxxxxxxxxxxx");
  EXPECT_THROW(read_codebook(bad), DataError);
}
