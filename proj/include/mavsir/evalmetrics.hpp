#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mavsir/error.hpp"

namespace mavsir {

struct RankedItem {
  std::string shot_id;
  double score = 0.0;
  bool relevant = false;
};

struct RankedList {
  std::string target;
  std::vector<RankedItem> items;  // best first
};

/// Mean over relevant ranks of precision at that rank.
inline double average_precision(const RankedList& r) {
  double hits = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < r.items.size(); ++k) {
    if (k > 0 && r.items[k].score > r.items[k - 1].score)
      throw DataError("average_precision: scores must be non-increasing");
    if (!r.items[k].relevant) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(k + 1);
  }
  if (hits == 0.0) throw DataError("average_precision: no relevant shot for '" + r.target + "'");
  return sum / hits;
}

struct Interval {
  double start = 0.0, end = 0.0;  // seconds
  double mid() const { return 0.5 * (start + end); }
};

struct Detection {
  Interval span;
  double confidence = 0.0;
};

struct DetectionSet {
  std::string event;
  std::vector<Detection> detections;
  std::vector<Interval> references;
  double duration_hours = 1.0;

  void validate() const {
    detail::require(duration_hours > 0.0, "detection set: duration must be > 0");
    for (const auto& d : detections)
      detail::require(d.span.start < d.span.end, "detection set: interval with start >= end");
    for (const auto& r : references) detail::require(r.start < r.end, "detection set: interval with start >= end");
  }
};

struct NdcrCosts {
  double cost_miss = 10.0;
  double cost_fa = 1.0;
  double r_target = 20.0;  // events per hour

  void validate() const {
    detail::require<ConfigError>(cost_miss > 0 && cost_fa > 0 && r_target > 0, "NDCR costs must be > 0");
  }
  double beta() const { return cost_fa / (cost_miss * r_target); }
};

inline constexpr double kMatchWindow = 0.5;  // seconds between midpoints

struct NdcrPoint {
  double threshold = 0.0;
  double p_miss = 0.0;
  double r_fa = 0.0;  // per hour
  double ndcr = 0.0;
  int hits = 0, misses = 0, false_alarms = 0;
};

/// Detections with confidence >= threshold, matched one-to-one to references.
/// Greedy: candidate pairs within the window taken in order of increasing
/// midpoint distance, ties by higher confidence, then by index.
inline NdcrPoint ndcr_point(const DetectionSet& d, double threshold, const NdcrCosts& c) {
  d.validate();
  c.validate();
  if (d.references.empty()) throw DataError("ndcr: no references for '" + d.event + "'");
  struct Pair {
    double dist, conf;
    std::size_t det, ref;
  };
  std::vector<Pair> pairs;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < d.detections.size(); ++i) {
    if (!(d.detections[i].confidence >= threshold)) continue;
    ++kept;
    for (std::size_t j = 0; j < d.references.size(); ++j) {
      const double dist = std::abs(d.detections[i].span.mid() - d.references[j].mid());
      if (dist <= kMatchWindow) pairs.push_back({dist, d.detections[i].confidence, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.conf != b.conf) return a.conf > b.conf;
    if (a.det != b.det) return a.det < b.det;
    return a.ref < b.ref;
  });
  std::vector<bool> det_used(d.detections.size()), ref_used(d.references.size());
  int hits = 0;
  for (const auto& p : pairs) {
    if (det_used[p.det] || ref_used[p.ref]) continue;
    det_used[p.det] = ref_used[p.ref] = true;
    ++hits;
  }
  NdcrPoint out;
  out.threshold = threshold;
  out.hits = hits;
  out.misses = static_cast<int>(d.references.size()) - hits;
  out.false_alarms = static_cast<int>(kept) - hits;
  out.p_miss = static_cast<double>(out.misses) / static_cast<double>(d.references.size());
  out.r_fa = out.false_alarms / d.duration_hours;
  out.ndcr = out.p_miss + c.beta() * out.r_fa;
  return out;
}

inline double ndcr(const DetectionSet& d, double threshold, const NdcrCosts& c) {
  return ndcr_point(d, threshold, c).ndcr;
}

/// Sweep every distinct confidence plus +inf; first minimum wins, scanning
/// from the highest threshold down.
inline NdcrPoint minimum_ndcr(const DetectionSet& d, const NdcrCosts& c) {
  std::vector<double> ts{std::numeric_limits<double>::infinity()};
  for (const auto& det : d.detections) ts.push_back(det.confidence);
  std::sort(ts.begin(), ts.end(), std::greater<>());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  NdcrPoint best;
  best.ndcr = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    const NdcrPoint p = ndcr_point(d, t, c);
    if (p.ndcr < best.ndcr) best = p;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Line format shared by detections and references:
//   event <ws> start_seconds <ws> end_seconds [<ws> confidence]
// '#' starts a comment.
// ---------------------------------------------------------------------------

struct EventLine {
  std::string event;
  Interval span;
  double confidence = 1.0;
};

inline std::vector<EventLine> read_event_lines(std::istream& in, bool need_confidence) {
  std::vector<EventLine> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    EventLine e;
    if (!(ss >> e.event)) continue;
    if (!(ss >> e.span.start >> e.span.end) || (need_confidence && !(ss >> e.confidence)))
      throw DataError("event line " + std::to_string(lineno) + ": expected event start end" +
                      (need_confidence ? " confidence" : ""));
    if (!(e.span.start < e.span.end)) throw DataError("event line " + std::to_string(lineno) + ": start >= end");
    out.push_back(std::move(e));
  }
  return out;
}

/// Groups detections and references per event; every event with a reference
/// gets a set, in name order.
inline std::vector<DetectionSet> build_detection_sets(const std::vector<EventLine>& dets,
                                                      const std::vector<EventLine>& refs,
                                                      double duration_hours) {
  std::map<std::string, DetectionSet> by;
  for (const auto& r : refs) {
    auto& s = by[r.event];
    s.event = r.event;
    s.duration_hours = duration_hours;
    s.references.push_back(r.span);
  }
  for (const auto& d : dets) {
    auto it = by.find(d.event);
    if (it != by.end()) it->second.detections.push_back({d.span, d.confidence});
  }
  std::vector<DetectionSet> out;
  for (auto& [k, v] : by) out.push_back(std::move(v));
  return out;
}

}  // namespace mavsir
