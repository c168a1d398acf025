#pragma once

// Soft-margin SVM trained on the dual
//   max W(a) = sum a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//   s.t. 0 <= a_i <= C_i, sum a_i y_i = 0
// by sequential minimal optimization with second-order working-set
// selection (the pair update is exact, so W never decreases).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mavsir/error.hpp"

namespace mavsir {

enum class KernelKind { Linear, Rbf, Polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double gamma = 1.0;  // rbf
  int degree = 2;      // polynomial
  double coef = 1.0;   // polynomial

  void validate() const {
    detail::require<ConfigError>(kind != KernelKind::Rbf || gamma > 0.0, "rbf gamma must be > 0");
    detail::require<ConfigError>(kind != KernelKind::Polynomial || degree >= 1, "polynomial degree must be >= 1");
  }
  bool operator==(const KernelSpec&) const = default;
};

inline double kernel_eval(const KernelSpec& k, const std::vector<double>& x, const std::vector<double>& z) {
  detail::require(x.size() == z.size(), "kernel_eval: dimensionality mismatch");
  switch (k.kind) {
    case KernelKind::Linear:
      return std::inner_product(x.begin(), x.end(), z.begin(), 0.0);
    case KernelKind::Rbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - z[i]) * (x[i] - z[i]);
      return std::exp(-k.gamma * d2);
    }
    case KernelKind::Polynomial:
      return std::pow(std::inner_product(x.begin(), x.end(), z.begin(), 0.0) + k.coef, k.degree);
  }
  return 0.0;
}

struct SvmModel {
  KernelSpec kernel;
  std::vector<std::vector<double>> sv;
  std::vector<double> y;      // +-1 per support vector
  std::vector<double> alpha;  // > 0
  double b = 0.0;
  double C = 1.0;

  bool operator==(const SvmModel&) const = default;
};

struct SvmParams {
  double C = 1.0;
  KernelSpec kernel;
  double kkt_tol = 1e-3;
  long max_passes = 1'000'000;  // cap on pair updates

  void validate() const {
    detail::require<ConfigError>(C > 0.0 && std::isfinite(C), "C must be > 0");
    detail::require<ConfigError>(kkt_tol > 0.0, "kkt_tol must be > 0");
    detail::require<ConfigError>(max_passes >= 1, "max_passes must be >= 1");
    kernel.validate();
  }
};

/// Everything about one solve, in training-set indexing.
struct SvmSolution {
  SvmModel model;
  std::vector<double> alpha;  // every training point
  std::vector<double> upper;  // per-point box C_i
  long iterations = 0;
  double gap = 0.0;  // final maximal violation m(a) - M(a)
  std::vector<double> objective;  // W after every pair update, when tracked
};

class SvmNotConverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline double dual_objective(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const std::vector<double>& alpha, const KernelSpec& k) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    lin += alpha[i];
    for (std::size_t j = 0; j < x.size(); ++j)
      if (alpha[j] != 0.0) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel_eval(k, x[i], x[j]);
  }
  return lin - 0.5 * quad;
}

/// Per-point upper bounds C * w_i * n / sum(w). Empty weights mean uniform.
inline std::vector<double> box_bounds(double C, const std::vector<double>& weights, std::size_t n) {
  if (weights.empty()) return std::vector<double>(n, C);
  detail::require(weights.size() == n, "svm_train: weight count mismatch");
  double s = 0.0;
  for (double w : weights) {
    detail::require(w >= 0.0 && std::isfinite(w), "svm_train: weights must be finite and >= 0");
    s += w;
  }
  detail::require(s > 0.0, "svm_train: all weights are zero");
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = C * weights[i] * static_cast<double>(n) / s;
  return c;
}

inline SvmSolution svm_solve(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const std::vector<double>& weights, const SvmParams& p,
                             bool track_objective = false) {
  p.validate();
  const int n = static_cast<int>(x.size());
  detail::require(static_cast<int>(y.size()) == n && n >= 2, "svm_train: need >= 2 labelled points");
  bool pos = false, neg = false;
  for (int i = 0; i < n; ++i) {
    detail::require(y[i] == 1 || y[i] == -1, "svm_train: labels must be +-1");
    detail::require(x[i].size() == x[0].size(), "svm_train: dimensionality mismatch");
    pos = pos || y[i] == 1;
    neg = neg || y[i] == -1;
  }
  if (!pos || !neg) throw DataError("svm_train: single-class data");

  SvmSolution sol;
  sol.upper = box_bounds(p.C, weights, n);
  const auto& cu = sol.upper;
  std::vector<double> K(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      K[static_cast<std::size_t>(i) * n + j] = K[static_cast<std::size_t>(j) * n + i] = kernel_eval(p.kernel, x[i], x[j]);
  auto k = [&](int i, int j) { return K[static_cast<std::size_t>(i) * n + j]; };

  std::vector<double>& a = sol.alpha;
  a.assign(n, 0.0);
  std::vector<double> G(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  auto in_up = [&](int t) { return (y[t] == 1 && a[t] < cu[t]) || (y[t] == -1 && a[t] > 0.0); };
  auto in_low = [&](int t) { return (y[t] == 1 && a[t] > 0.0) || (y[t] == -1 && a[t] < cu[t]); };
  constexpr double kTau = 1e-12;
  double W = 0.0;

  for (;;) {
    // i: maximal violator; j: second-order choice among I_low.
    int i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * G[t] > gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    int j = -1;
    double gmin = std::numeric_limits<double>::infinity(), best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmin = std::min(gmin, -y[t] * G[t]);
      const double bgap = gmax + y[t] * G[t];
      if (i >= 0 && bgap > 0.0) {
        double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (quad <= 0.0) quad = kTau;
        if (-bgap * bgap / quad < best) {
          best = -bgap * bgap / quad;
          j = t;
        }
      }
    }
    sol.gap = gmax - gmin;
    if (i < 0 || j < 0 || sol.gap < p.kkt_tol) break;
    if (sol.iterations >= p.max_passes)
      throw SvmNotConverged("SMO did not converge in " + std::to_string(p.max_passes) +
                            " pair updates (violation " + std::to_string(sol.gap) + ")");

    const double ai = a[i], aj = a[j];
    const double Ci = cu[i], Cj = cu[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > Ci - Cj) {
        if (a[i] > Ci) { a[i] = Ci; a[j] = Ci - diff; }
      } else {
        if (a[j] > Cj) { a[j] = Cj; a[i] = Cj + diff; }
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > Ci) {
        if (a[i] > Ci) { a[i] = Ci; a[j] = sum - Ci; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > Cj) {
        if (a[j] > Cj) { a[j] = Cj; a[i] = sum - Cj; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double di = a[i] - ai, dj = a[j] - aj;
    for (int t = 0; t < n; ++t) G[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
    ++sol.iterations;
    if (track_objective) {
      // W = -(1/2 a'Qa - e'a) = -1/2 sum a_t (G_t - 1)
      W = 0.0;
      for (int t = 0; t < n; ++t) W -= 0.5 * a[t] * (G[t] - 1.0);
      sol.objective.push_back(W);
    }
  }

  // Offset: mean of y G over free vectors, else the midpoint of the
  // feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int nfree = 0;
  for (int t = 0; t < n; ++t) {
    if (cu[t] <= 0.0) continue;  // zero-weight point, pinned at 0
    const double yg = y[t] * G[t];
    if (a[t] >= cu[t]) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nfree;
      sum_free += yg;
    }
  }
  double rho = nfree > 0 ? sum_free / nfree : 0.5 * (ub + lb);
  if (!std::isfinite(rho)) rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);

  SvmModel& m = sol.model;
  m.kernel = p.kernel;
  m.C = p.C;
  m.b = rho;
  for (int t = 0; t < n; ++t) {
    if (a[t] <= 0.0) continue;
    m.sv.push_back(x[t]);
    m.y.push_back(y[t]);
    m.alpha.push_back(a[t]);
  }
  return sol;
}

inline SvmModel svm_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const SvmParams& p, const std::vector<double>& weights = {}) {
  return svm_solve(x, y, weights, p).model;
}

/// f(x) = sum a_i y_i K(x_i, x) - b.
inline double svm_margin(const SvmModel& m, const std::vector<double>& x) {
  double f = -m.b;
  for (std::size_t i = 0; i < m.sv.size(); ++i) f += m.alpha[i] * m.y[i] * kernel_eval(m.kernel, m.sv[i], x);
  return f;
}

struct Prediction {
  int label;
  double value;
};

/// sign(f), with sign(0) = +1.
inline Prediction svm_predict(const SvmModel& m, const std::vector<double>& x) {
  const double f = svm_margin(m, x);
  return {f >= 0.0 ? 1 : -1, f};
}

}  // namespace mavsir
