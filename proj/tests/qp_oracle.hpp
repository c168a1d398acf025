#pragma once

// Exact optimum of the SVM dual on tiny problems by enumerating every
// assignment of each alpha to {0, upper, free} and solving the equality-
// constrained stationarity system on the free set.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mavsir/svm.hpp"
#include "mavsir/synth.hpp"

namespace testing_support {

struct QpOptimum {
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<double> alpha;
};

inline double dual_value(const Eigen::MatrixXd& Q, const Eigen::VectorXd& a) {
  return a.sum() - 0.5 * a.dot(Q * a);
}

inline QpOptimum exhaustive_dual(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                 const std::vector<double>& upper, const mavsir::KernelSpec& k) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q(i, j) = y[i] * y[j] * mavsir::kernel_eval(k, x[i], x[j]);
  Eigen::VectorXd yv(n);
  for (int i = 0; i < n; ++i) yv[i] = y[i];

  QpOptimum best;
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  std::vector<int> state(n);
  for (int code = 0; code < combos; ++code) {
    int c = code;
    std::vector<int> free;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[i] = c % 3;
      c /= 3;
      if (state[i] == 1) a[i] = upper[i];
      if (state[i] == 2) free.push_back(i);
    }
    const int f = static_cast<int>(free.size());
    if (f > 0) {
      // [Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B]
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd r(f + 1);
      const Eigen::VectorXd qa = Q * a;
      for (int p = 0; p < f; ++p) {
        for (int q = 0; q < f; ++q) M(p, q) = Q(free[p], free[q]);
        M(p, f) = M(f, p) = yv[free[p]];
        r[p] = 1.0 - qa[free[p]];
      }
      r[f] = -yv.dot(a);
      const Eigen::VectorXd s = M.completeOrthogonalDecomposition().solve(r);
      if ((M * s - r).norm() > 1e-9 * (1.0 + r.norm())) continue;
      for (int p = 0; p < f; ++p) a[free[p]] = s[p];
    }
    bool feasible = std::abs(yv.dot(a)) <= 1e-9;
    for (int i = 0; i < n && feasible; ++i) feasible = a[i] >= -1e-12 && a[i] <= upper[i] + 1e-12;
    if (!feasible) continue;
    const double v = dual_value(Q, a);
    if (v > best.objective) {
      best.objective = v;
      best.alpha.assign(a.data(), a.data() + n);
    }
  }
  return best;
}

/// Largest violation of the per-point optimality conditions of a solved dual.
inline double kkt_violation(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                            const mavsir::SvmSolution& sol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = y[i] * mavsir::svm_margin(sol.model, x[i]);
    const double a = sol.alpha[i], c = sol.upper[i];
    if (a <= 0.0)
      worst = std::max(worst, 1.0 - m);
    else if (a >= c)
      worst = std::max(worst, m - 1.0);
    else
      worst = std::max(worst, std::abs(m - 1.0));
  }
  return worst;
}

/// Fixed suite of tiny problems: sizes 3..8, mixed kernels and C.
struct TinyProblem {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  mavsir::SvmParams params;
};

inline std::vector<TinyProblem> tiny_svm_suite() {
  std::vector<TinyProblem> out;
  mavsir::Rng rng(2024);
  const mavsir::KernelSpec kernels[] = {{mavsir::KernelKind::Linear, 1, 2, 1},
                                        {mavsir::KernelKind::Rbf, 0.7, 2, 1},
                                        {mavsir::KernelKind::Polynomial, 1, 2, 1}};
  for (int t = 0; t < 10; ++t) {
    TinyProblem p;
    const int n = 3 + t % 6;
    for (int i = 0; i < n; ++i) {
      const int label = i == 0 ? 1 : (i == 1 ? -1 : (rng.uniform() < 0.5 ? 1 : -1));
      p.y.push_back(label);
      p.x.push_back({rng.normal() + 0.8 * label, rng.normal()});
    }
    p.params.kernel = kernels[t % 3];
    p.params.C = std::array{0.5, 2.0, 10.0}[t % 3 == 0 ? (t / 3) % 3 : t % 3];
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace testing_support
