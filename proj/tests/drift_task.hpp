#pragma once

// Two-batch incremental learning task. The first batch only covers the
// lower half-plane, where the class boundary is x = 0. In the upper half the
// boundary moves to x = 3, which the first batch never shows. The second
// batch samples both halves, so an ensemble that learns incrementally should
// gain on a test set that mixes them.

#include "mavsir/learnpp.hpp"
#include "mavsir/synth.hpp"

namespace testing_support {

inline constexpr double kDriftShift = 3.0;
inline constexpr double kDriftNoise = 0.05;  // label flips, both batches

inline int drift_truth(double x, double y) { return y < 0 ? (x > 0 ? 1 : -1) : (x > kDriftShift ? 1 : -1); }

inline mavsir::Batch drift_draw(mavsir::Rng& r, int n, double p_lower, double noise) {
  mavsir::Batch b;
  for (int i = 0; i < n; ++i) {
    const bool lower = r.uniform() < p_lower;
    const double y = lower ? r.uniform(-3, -0.5) : r.uniform(0.5, 3);
    const double x = lower ? r.uniform(-4, 4) : r.uniform(kDriftShift - 4, kDriftShift + 4);
    int l = drift_truth(x, y);
    if (r.uniform() < noise) l = -l;
    b.x.push_back({x, y});
    b.y.push_back(l);
  }
  return b;
}

inline double accuracy(const mavsir::EnsembleModel& e, const mavsir::Batch& b) {
  int c = 0;
  for (std::size_t i = 0; i < b.x.size(); ++i) c += mavsir::learnpp_predict(e, b.x[i]).label == b.y[i];
  return static_cast<double>(c) / static_cast<double>(b.x.size());
}

/// Keeps whatever the batch produced before a round ran out of retries,
/// which is what the pipeline does.
inline mavsir::EnsembleModel train_keep_partial(const mavsir::EnsembleModel& e, const mavsir::Batch& b,
                                                const mavsir::TrainParams& p) {
  try {
    return mavsir::learnpp_train_batch(e, b, p);
  } catch (const mavsir::RetriesExhausted& x) {
    auto r = x.partial;
    ++r.batches;
    return r;
  }
}

struct DriftOutcome {
  double before = 0;  // accuracy after batch 1
  double after = 0;   // after batch 2
};

inline DriftOutcome run_drift(std::uint64_t seed) {
  mavsir::Rng r(seed);
  const auto b1 = drift_draw(r, 60, 1.0, kDriftNoise);
  const auto b2 = drift_draw(r, 60, 0.5, kDriftNoise);
  const auto test = drift_draw(r, 400, 0.5, 0.0);
  mavsir::TrainParams p;
  p.kernel = {mavsir::KernelKind::Rbf, 0.5, 2, 1.0};
  p.seed = seed;
  const auto e1 = train_keep_partial({}, b1, p);
  const auto e2 = train_keep_partial(e1, b2, p);
  return {accuracy(e1, test), accuracy(e2, test)};
}

}  // namespace testing_support
