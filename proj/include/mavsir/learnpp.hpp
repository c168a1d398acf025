#pragma once

// Learn++ ensemble of SVMs. Each batch D_k adds T_k hypotheses trained on
// distribution-weighted subsamples of that batch only; earlier batches are
// never revisited. The final decision is a log(1/beta) weighted vote.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "mavsir/binio.hpp"
#include "mavsir/error.hpp"
#include "mavsir/svm.hpp"
#include "mavsir/synth.hpp"

namespace mavsir {

inline constexpr double kBetaFloor = 1e-10;

struct WeakHypothesis {
  SvmModel model;
  double beta = 0.5;            // from the hypothesis' own error; sets its vote
  double composite_beta = 0.5;  // from the composite error; drove the update
  int batch = 0;
  int t = 0;

  double weight() const { return std::log(1.0 / beta); }
  bool operator==(const WeakHypothesis&) const = default;
};

struct EnsembleModel {
  std::string target;
  std::vector<WeakHypothesis> hypotheses;
  std::vector<double> distribution;  // S_t of the last round, diagnostic only
  int batches = 0;
};

struct TrainParams {
  double C = 10.0;
  // Signatures are concatenated one-hot-ish blocks, so squared distances grow
  // with the channel count (27); 0.02 keeps exp(-gamma d^2) off the floor.
  KernelSpec kernel{KernelKind::Rbf, 0.02, 2, 1.0};
  int T_k = 5;
  double train_fraction = 0.7;
  double kkt_tol = 1e-3;
  long max_passes = 1'000'000;
  std::uint64_t seed = 1;
  int max_retries = 10;

  void validate() const {
    detail::require<ConfigError>(C > 0.0, "C must be > 0");
    detail::require<ConfigError>(T_k >= 1, "T_k must be >= 1");
    detail::require<ConfigError>(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must be in (0,1)");
    detail::require<ConfigError>(max_retries >= 0, "max_retries must be >= 0");
    svm_params().validate();
  }
  SvmParams svm_params() const { return SvmParams{C, kernel, kkt_tol, max_passes}; }
};

struct Batch {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

/// Weighted vote of `hyps`; returns (label, (W+ - W-)/(W+ + W-)). Ties -> +1.
inline Prediction weighted_vote(const std::vector<WeakHypothesis>& hyps, const std::vector<double>& x) {
  double wp = 0.0, wn = 0.0;
  for (const auto& h : hyps) (svm_predict(h.model, x).label > 0 ? wp : wn) += h.weight();
  const double tot = wp + wn;
  return {wp >= wn ? 1 : -1, tot > 0.0 ? (wp - wn) / tot : 0.0};
}

inline Prediction learnpp_predict(const EnsembleModel& ens, const std::vector<double>& x) {
  detail::require(!ens.hypotheses.empty(), "learnpp_predict: empty ensemble");
  return weighted_vote(ens.hypotheses, x);
}

/// Carries the ensemble as it stood when the round gave up, with every
/// hypothesis accepted earlier in the batch.
class RetriesExhausted : public NumericalError {
 public:
  RetriesExhausted(const std::string& what, EnsembleModel partial)
      : NumericalError(what), partial(std::move(partial)) {}
  EnsembleModel partial;
};

/// Per-round record for inspection by callers and tests.
struct RoundLog {
  std::vector<double> s;       // S_t, sums to 1
  std::vector<double> w_next;  // w_{t+1} before renormalization
  std::vector<bool> composite_correct;
  double error = 0.0;  // individual weighted error of h_t
  double composite_error = 0.0;
  int retries = 0;
};

namespace detail {

/// Weighted sampling of `count` distinct indices (sequential draws, each
/// proportional to the remaining weight).
inline std::vector<int> weighted_sample(const std::vector<double>& s, int count, Rng& rng) {
  std::vector<double> w = s;
  std::vector<int> out;
  for (int c = 0; c < count; ++c) {
    double tot = std::accumulate(w.begin(), w.end(), 0.0);
    int pick = -1;
    if (tot > 0.0) {
      double r = rng.uniform() * tot;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        pick = static_cast<int>(i);
        r -= w[i];
        if (r < 0.0) break;
      }
    } else {
      for (std::size_t i = 0; i < w.size() && pick < 0; ++i)
        if (std::find(out.begin(), out.end(), static_cast<int>(i)) == out.end()) pick = static_cast<int>(i);
    }
    out.push_back(pick);
    w[pick] = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double beta_of(double e) { return std::max(e / (1.0 - e), kBetaFloor); }

}  // namespace detail

inline EnsembleModel learnpp_train_batch(EnsembleModel ens, const Batch& batch, const TrainParams& p,
                                         std::vector<RoundLog>* log = nullptr) {
  p.validate();
  const int m = static_cast<int>(batch.x.size());
  detail::require(static_cast<int>(batch.y.size()) == m, "learnpp: label count mismatch");
  const bool pos = std::count(batch.y.begin(), batch.y.end(), 1) > 0;
  const bool neg = std::count(batch.y.begin(), batch.y.end(), -1) > 0;
  if (!pos || !neg) throw DataError("learnpp: batch must contain both classes");
  const int ntr = std::clamp(static_cast<int>(std::lround(p.train_fraction * m)), 2, m);

  const int k = ens.batches;
  Rng rng(p.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1)));
  std::vector<double> w(m, 1.0 / m);
  for (int t = 1; t <= p.T_k; ++t) {
    RoundLog rl;
    for (;; ++rl.retries) {
      if (rl.retries > p.max_retries)
        throw RetriesExhausted("learnpp: no acceptable hypothesis after " + std::to_string(p.max_retries) +
                               " retries (batch " + std::to_string(k) + ", round " + std::to_string(t) + ")",
                               ens);
      const double sw = std::accumulate(w.begin(), w.end(), 0.0);
      rl.s.resize(m);
      for (int i = 0; i < m; ++i) rl.s[i] = w[i] / sw;
      const auto tr = detail::weighted_sample(rl.s, ntr, rng);
      Batch sub;
      for (int i : tr) {
        sub.x.push_back(batch.x[i]);
        sub.y.push_back(batch.y[i]);
      }
      if (std::count(sub.y.begin(), sub.y.end(), 1) == 0 || std::count(sub.y.begin(), sub.y.end(), -1) == 0)
        continue;  // single-class draw
      WeakHypothesis h{svm_train(sub.x, sub.y, p.svm_params()), 0.5, 0.5, k, t};
      rl.error = 0.0;
      for (int i = 0; i < m; ++i)
        if (svm_predict(h.model, batch.x[i]).label != batch.y[i]) rl.error += rl.s[i];
      if (rl.error >= 0.5) continue;
      h.beta = detail::beta_of(rl.error);

      std::vector<WeakHypothesis> trial = ens.hypotheses;
      trial.push_back(h);
      rl.composite_correct.assign(m, false);
      rl.composite_error = 0.0;
      for (int i = 0; i < m; ++i) {
        rl.composite_correct[i] = weighted_vote(trial, batch.x[i]).label == batch.y[i];
        if (!rl.composite_correct[i]) rl.composite_error += rl.s[i];
      }
      if (rl.composite_error >= 0.5) continue;
      h.composite_beta = detail::beta_of(rl.composite_error);
      ens.hypotheses.push_back(std::move(h));
      break;
    }
    const double B = ens.hypotheses.back().composite_beta;
    for (int i = 0; i < m; ++i)
      if (rl.composite_correct[i]) w[i] *= B;
    rl.w_next = w;
    const double sw = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= sw;  // keeps repeated floored products representable
    ens.distribution = rl.s;
    if (log) log->push_back(std::move(rl));
  }
  ++ens.batches;
  return ens;
}

// ---------------------------------------------------------------------------
// MAVSVM01: magic, u32 target length + bytes, u32 batches, u32 hypothesis
// count, then per hypothesis: u32 batch, u32 t, f64 beta, f64 composite
// beta, u32 kernel kind, f64 gamma, u32 degree, f64 coef, f64 C, f64 b,
// u32 support vectors, u32 dim, then (f64 y, f64 alpha, dim x f64) each.
// ---------------------------------------------------------------------------

inline constexpr char kModelMagic[] = "MAVSVM01";

inline void write_ensemble(std::ostream& out, const EnsembleModel& e) {
  using namespace detail;
  put_magic(out, kModelMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(e.target.size()));
  out.write(e.target.data(), static_cast<std::streamsize>(e.target.size()));
  put_u32(out, static_cast<std::uint32_t>(e.batches));
  put_u32(out, static_cast<std::uint32_t>(e.hypotheses.size()));
  for (const auto& h : e.hypotheses) {
    put_u32(out, static_cast<std::uint32_t>(h.batch));
    put_u32(out, static_cast<std::uint32_t>(h.t));
    put_f64(out, h.beta);
    put_f64(out, h.composite_beta);
    put_u32(out, static_cast<std::uint32_t>(h.model.kernel.kind));
    put_f64(out, h.model.kernel.gamma);
    put_u32(out, static_cast<std::uint32_t>(h.model.kernel.degree));
    put_f64(out, h.model.kernel.coef);
    put_f64(out, h.model.C);
    put_f64(out, h.model.b);
    put_u32(out, static_cast<std::uint32_t>(h.model.sv.size()));
    put_u32(out, static_cast<std::uint32_t>(h.model.sv.empty() ? 0 : h.model.sv[0].size()));
    for (std::size_t i = 0; i < h.model.sv.size(); ++i) {
      put_f64(out, h.model.y[i]);
      put_f64(out, h.model.alpha[i]);
      for (double v : h.model.sv[i]) put_f64(out, v);
    }
  }
}

inline EnsembleModel read_ensemble(std::istream& in) {
  using namespace detail;
  expect_magic(in, kModelMagic, 8);
  EnsembleModel e;
  const auto len = get_u32(in);
  if (len > 4096) throw DataError("model: bad target name length");
  e.target.resize(len);
  in.read(e.target.data(), len);
  if (static_cast<std::uint32_t>(in.gcount()) != len) throw DataError("unexpected end of binary stream");
  e.batches = static_cast<int>(get_u32(in));
  const auto nh = get_u32(in);
  if (nh < 1 || nh > 1u << 20) throw DataError("model: bad hypothesis count");
  for (std::uint32_t k = 0; k < nh; ++k) {
    WeakHypothesis h;
    h.batch = static_cast<int>(get_u32(in));
    h.t = static_cast<int>(get_u32(in));
    h.beta = get_f64(in);
    h.composite_beta = get_f64(in);
    const auto kind = get_u32(in);
    if (kind > 2) throw DataError("model: bad kernel kind");
    h.model.kernel.kind = static_cast<KernelKind>(kind);
    h.model.kernel.gamma = get_f64(in);
    h.model.kernel.degree = static_cast<int>(get_u32(in));
    h.model.kernel.coef = get_f64(in);
    h.model.C = get_f64(in);
    h.model.b = get_f64(in);
    const auto nsv = get_u32(in), dim = get_u32(in);
    if (nsv > 1u << 24 || dim > 1u << 16) throw DataError("model: bad support vector table");
    for (std::uint32_t i = 0; i < nsv; ++i) {
      h.model.y.push_back(get_f64(in));
      h.model.alpha.push_back(get_f64(in));
      std::vector<double> v(dim);
      for (double& d : v) d = get_f64(in);
      h.model.sv.push_back(std::move(v));
    }
    if (!(h.beta > 0.0 && h.beta < 1.0)) throw DataError("model: beta outside (0,1)");
    e.hypotheses.push_back(std::move(h));
  }
  return e;
}

inline void write_ensemble_file(const std::string& path, const EnsembleModel& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_ensemble(out, e);
}

inline EnsembleModel read_ensemble_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_ensemble(in);
}

}  // namespace mavsir
