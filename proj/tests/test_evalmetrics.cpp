#include <gtest/gtest.h>

#include <sstream>

#include "metric_oracle.hpp"
#include "mavsir/evalmetrics.hpp"

using namespace mavsir;
using namespace testing_support;

namespace {

RankedList ranked(const std::vector<bool>& rel) {
  RankedList r{"C1", {}};
  for (std::size_t i = 0; i < rel.size(); ++i)
    r.items.push_back({"s" + std::to_string(i), 1.0 - 0.1 * static_cast<double>(i), rel[i]});
  return r;
}

}  // namespace

TEST(AveragePrecision, Patterns) {
  EXPECT_DOUBLE_EQ(average_precision(ranked({true, true, true})), 1.0);
  EXPECT_NEAR(average_precision(ranked({true, false, true})), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(average_precision(ranked({true, false, true})), 0.8333, 1e-4);
  EXPECT_NEAR(average_precision(ranked({false, true})), 0.5, 1e-15);
  EXPECT_LT(average_precision(ranked({false, true, true})), average_precision(ranked({true, true, false})));
}

TEST(AveragePrecision, RandomListsStayInUnitInterval) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    std::vector<bool> rel(10);
    for (auto&& r : rel) r = rng.uniform() < 0.4;
    rel[rng.uniform_int(0, 9)] = true;
    const double ap = average_precision(ranked(rel));
    EXPECT_GT(ap, 0.0);
    EXPECT_LE(ap, 1.0);
    // Moving the first relevant hit to the top never hurts.
    auto better = rel;
    for (std::size_t i = 0; i < better.size(); ++i)
      if (better[i]) {
        std::swap(better[0], better[i]);
        break;
      }
    EXPECT_GE(average_precision(ranked(better)), ap);
  }
}

TEST(AveragePrecision, Errors) {
  EXPECT_THROW(average_precision(ranked({false, false})), DataError);
  auto r = ranked({true, true});
  r.items[1].score = 5.0;
  EXPECT_THROW(average_precision(r), DataError);
}

TEST(Ndcr, PerfectAndEmptyOperatingPoints) {
  DetectionSet d{"E", {{{1, 2}, 0.9}, {{10, 11}, 0.8}}, {{1.1, 2.1}, {9.8, 10.9}}, 1.0};
  const NdcrCosts c;
  EXPECT_EQ(ndcr(d, 0.5, c), 0.0);
  EXPECT_EQ(ndcr(d, 0.95, c), 1.0);
  const auto p = ndcr_point(d, std::numeric_limits<double>::infinity(), c);
  EXPECT_EQ(p.ndcr, 1.0);
  EXPECT_EQ(p.false_alarms, 0);
}

TEST(Ndcr, WorkedExample) {
  // One of two references hit and two false alarms in one hour.
  DetectionSet d{"E", {{{1, 2}, 0.9}, {{20, 21}, 0.9}, {{40, 41}, 0.9}}, {{1, 2}, {60, 61}}, 1.0};
  const auto p = ndcr_point(d, 0.5, NdcrCosts{});
  EXPECT_EQ(p.hits, 1);
  EXPECT_EQ(p.misses, 1);
  EXPECT_EQ(p.false_alarms, 2);
  EXPECT_EQ(p.ndcr, 0.51);
}

TEST(Ndcr, MatchingIsOneToOneAndWindowed) {
  // Two detections near one reference: one hit, one false alarm.
  DetectionSet d{"E", {{{1, 2}, 0.9}, {{1.2, 2.2}, 0.8}, {{2.1, 3.1}, 0.7}}, {{1, 2}}, 1.0};
  const auto p = ndcr_point(d, 0.0, NdcrCosts{});
  EXPECT_EQ(p.hits, 1);
  EXPECT_EQ(p.false_alarms, 2);  // midpoint 2.6 is outside +-0.5 of 1.5
  DetectionSet edge{"E", {{{2.0, 3.0}, 1}}, {{1.5, 2.5}}, 1.0};
  EXPECT_EQ(ndcr_point(edge, 0.0, NdcrCosts{}).hits, 1);  // exactly 0.5 apart
}

TEST(MinimumNdcr, PerfectSeparationReachesZero) {
  DetectionSet d{"E", {{{1, 2}, 0.9}, {{30, 31}, 0.2}, {{10, 11}, 0.8}, {{50, 51}, 0.1}}, {{1, 2}, {10, 11}}, 0.5};
  const auto m = minimum_ndcr(d, NdcrCosts{});
  EXPECT_EQ(m.ndcr, 0.0);
  EXPECT_EQ(m.threshold, 0.8);
}

TEST(MinimumNdcr, MatchesIndependentOracle) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto d = random_detection_set(s);
    for (const NdcrCosts& c : {NdcrCosts{}, NdcrCosts{1, 1, 1}}) {
      const auto m = minimum_ndcr(d, c);
      EXPECT_NEAR(m.ndcr, min_ndcr_oracle(d, c), 1e-12) << "seed " << s;
      for (const auto& det : d.detections) {
        EXPECT_NEAR(ndcr(d, det.confidence, c), ndcr_oracle(d, det.confidence, c), 1e-12);
        EXPECT_LE(m.ndcr, ndcr(d, det.confidence, c));
      }
      EXPECT_LE(m.ndcr, 1.0);
    }
  }
}

TEST(Ndcr, Errors) {
  DetectionSet none{"E", {{{1, 2}, 1}}, {}, 1.0};
  EXPECT_THROW(ndcr(none, 0, NdcrCosts{}), DataError);
  DetectionSet bad{"E", {{{2, 1}, 1}}, {{1, 2}}, 1.0};
  EXPECT_THROW(ndcr(bad, 0, NdcrCosts{}), DataError);
  DetectionSet ok{"E", {}, {{1, 2}}, 1.0};
  EXPECT_THROW(ndcr(ok, 0, NdcrCosts{0, 1, 1}), ConfigError);
}

TEST(EventLines, ParseAndGroup) {
  std::istringstream dets("# comment\nE1 1 2 0.5\nE2 3 4 0.9\nE9 1 2 1\n");
  std::istringstream refs("E1 1 2\nE2 3 4\nE2 8 9\n");
  const auto sets = build_detection_sets(read_event_lines(dets, true), read_event_lines(refs, false), 2.0);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].event, "E1");
  EXPECT_EQ(sets[1].references.size(), 2u);
  EXPECT_EQ(sets[1].detections.size(), 1u);
  std::istringstream broken("E1 1\n");
  EXPECT_THROW(read_event_lines(broken, false), DataError);
}
