#pragma once

// Two-region level-set segmentation of a speed map. Inside = {U < 0} holds
// the moving objects, outside = {U > 0} the static scene.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "mavsir/error.hpp"
#include "mavsir/image.hpp"
#include "mavsir/imgcore.hpp"
#include "mavsir/optflow.hpp"

namespace mavsir {

struct LevelSet {
  Frame u_grid;

  int width() const { return u_grid.width(); }
  int height() const { return u_grid.height(); }

  Mask inside() const {
    Mask m(width(), height());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = u_grid[i] < 0.0 ? 1 : 0;
    return m;
  }
};

struct ChanVeseParams {
  double cv_lambda = 1.0;
  std::optional<double> mu;  // unset: 0.01 * (max speed - min speed)^2
  double epsilon = 1.0;
  double dt = 0.5;
  int max_iters = 300;
  double stop_tol = 1e-4;
  int min_area = kDefaultMinArea;
  // Speed maps whose dynamic range is below this carry no motion evidence.
  double min_contrast = 1e-9;

  void validate() const {
    detail::require<ConfigError>(cv_lambda > 0.0, "cv_lambda must be > 0");
    detail::require<ConfigError>(!mu || *mu >= 0.0, "mu must be >= 0");
    detail::require<ConfigError>(epsilon > 0.0, "epsilon must be > 0");
    detail::require<ConfigError>(dt > 0.0, "dt must be > 0");
    detail::require<ConfigError>(max_iters >= 1, "max_iters must be >= 1");
    detail::require<ConfigError>(stop_tol >= 0.0, "stop_tol must be >= 0");
    detail::require<ConfigError>(min_area >= 1, "min_area must be >= 1");
  }
};

struct RegionStats {
  double c1 = 0.0;  // mean speed inside
  double c2 = 0.0;  // mean speed outside
};

struct SegmentationResult {
  Mask mask;
  std::vector<Component> objects;
  RegionStats stats;
  int iterations = 0;
  int reinitializations = 0;
  LevelSet level_set;
  std::vector<double> energies;  // J after initialization and after every step
};

/// Thrown when one region's regularized area vanishes.
class DegenerateRegion : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// Regularized Heaviside, reversed convention: H -> 1 as z -> -inf (inside).
// ---------------------------------------------------------------------------

inline double heaviside(double z, double epsilon) {
  return 0.5 * (1.0 - (2.0 / std::numbers::pi) * std::atan(z / epsilon));
}

/// |dH/dz|; the regularized Dirac measure.
inline double dirac(double z, double epsilon) {
  return (1.0 / std::numbers::pi) * epsilon / (epsilon * epsilon + z * z);
}

inline constexpr double kDegenerateArea = 1e-9;
inline constexpr int kMaxStepHalvings = 40;
inline constexpr double kMaxStep = 1e6;
// Consecutive steps with fewer flips than stop_tol before the evolution stops.
inline constexpr int kQuietSteps = 5;

inline RegionStats region_means(const SpeedMap& sv, const LevelSet& ls, double epsilon) {
  detail::require(sv.data.same_shape(ls.u_grid), "region_means: shape mismatch");
  double num_in = 0.0, den_in = 0.0, num_out = 0.0, den_out = 0.0;
  for (std::size_t i = 0; i < sv.data.size(); ++i) {
    const double h = heaviside(ls.u_grid[i], epsilon);
    num_in += sv.data[i] * h;
    den_in += h;
    num_out += sv.data[i] * (1.0 - h);
    den_out += 1.0 - h;
  }
  if (den_in < kDegenerateArea || den_out < kDegenerateArea)
    throw DegenerateRegion("level set region vanished (inside weight " + std::to_string(den_in) +
                           ", outside weight " + std::to_string(den_out) + ")");
  return {num_in / den_in, num_out / den_out};
}

namespace detail {

struct UnitNormal {
  Frame nx, ny, grad_norm;
};

// Central differences with edge replication (zero normal derivative).
inline UnitNormal unit_normal(const Frame& u) {
  const int w = u.width(), h = u.height();
  UnitNormal n{Frame(w, h), Frame(w, h), Frame(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ux = 0.5 * (u.at_clamped(x + 1, y) - u.at_clamped(x - 1, y));
      const double uy = 0.5 * (u.at_clamped(x, y + 1) - u.at_clamped(x, y - 1));
      const double g = std::hypot(ux, uy);
      const double gf = std::max(g, 1e-8);
      n.nx(x, y) = ux / gf;
      n.ny(x, y) = uy / gf;
      n.grad_norm(x, y) = g;
    }
  }
  return n;
}

}  // namespace detail

/// div(grad U / |grad U|) by central differences of the unit normal field.
inline Frame curvature(const Frame& u) {
  const auto n = detail::unit_normal(u);
  Frame k(u.width(), u.height());
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      k(x, y) = 0.5 * (n.nx.at_clamped(x + 1, y) - n.nx.at_clamped(x - 1, y)) +
                0.5 * (n.ny.at_clamped(x, y + 1) - n.ny.at_clamped(x, y - 1));
    }
  }
  return k;
}

inline double effective_mu(const ChanVeseParams& p, const SpeedMap& sv) {
  if (p.mu) return *p.mu;
  const auto [mn, mx] = std::minmax_element(sv.data.values().begin(), sv.data.values().end());
  const double range = *mx - *mn;
  return 0.01 * range * range;
}

/// The bracketed force of the evolution equation at one pixel (data part).
inline double data_force(double speed, const RegionStats& s, double cv_lambda) {
  const double din = speed - s.c1, dout = speed - s.c2;
  return cv_lambda * din * din - cv_lambda * dout * dout;
}

/// Bracketed force of the evolution equation:
///   mu div(grad U/|grad U|) + lambda (S-c1)^2 - lambda (S-c2)^2.
inline Frame evolution_force(const LevelSet& ls, const SpeedMap& sv, const RegionStats& stats,
                             double cv_lambda, double mu) {
  detail::require(sv.data.same_shape(ls.u_grid), "evolution_force: shape mismatch");
  Frame f = mu > 0.0 ? curvature(ls.u_grid) : Frame(ls.width(), ls.height());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = mu * f[i] + data_force(sv.data[i], stats, cv_lambda);
  return f;
}

/// U + step * delta_eps(U) * force, pixelwise.
inline LevelSet apply_force(const LevelSet& ls, const Frame& force, double step, double epsilon) {
  LevelSet out{Frame(ls.width(), ls.height())};
  for (std::size_t i = 0; i < force.size(); ++i) {
    const double u = ls.u_grid[i];
    out.u_grid[i] = u + step * dirac(u, epsilon) * force[i];
  }
  return out;
}

/// One explicit step of
///   dU/dt = delta_eps(U) [ mu div(grad U/|grad U|) + lambda (S-c1)^2 - lambda (S-c2)^2 ]
/// with step p.dt. Jacobi-style: every pixel reads only the previous iterate.
inline LevelSet evolve_step(const LevelSet& ls, const SpeedMap& sv, const RegionStats& stats,
                            const ChanVeseParams& p, double mu) {
  return apply_force(ls, evolution_force(ls, sv, stats, p.cv_lambda, mu), p.dt, p.epsilon);
}

inline LevelSet evolve_step(const LevelSet& ls, const SpeedMap& sv, const RegionStats& stats,
                            const ChanVeseParams& p) {
  return evolve_step(ls, sv, stats, p, effective_mu(p, sv));
}

/// Discrete criterion J(U, c1, c2) with the regularized H and delta.
inline double chan_vese_energy(const LevelSet& ls, const SpeedMap& sv, const RegionStats& s,
                               double cv_lambda, double mu, double epsilon) {
  const auto n = detail::unit_normal(ls.u_grid);
  double j = 0.0;
  for (std::size_t i = 0; i < sv.data.size(); ++i) {
    const double u = ls.u_grid[i];
    const double h = heaviside(u, epsilon);
    const double din = sv.data[i] - s.c1, dout = sv.data[i] - s.c2;
    j += cv_lambda * din * din * h + cv_lambda * dout * dout * (1.0 - h) +
         mu * dirac(u, epsilon) * n.grad_norm[i];
  }
  return j;
}

/// Checkerboard of sin(pi x/10) sin(pi y/10) bumps.
inline LevelSet checkerboard_level_set(int width, int height, double phase = 0.0) {
  LevelSet ls{Frame(width, height)};
  constexpr double kPi = std::numbers::pi;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      ls.u_grid(x, y) = std::sin(kPi * (x + phase) / 10.0) * std::sin(kPi * (y + phase) / 10.0);
  return ls;
}

inline SegmentationResult segment_moving(const SpeedMap& sv, const ChanVeseParams& p,
                                         const LevelSet* warm_start = nullptr) {
  p.validate();
  const int w = sv.width(), h = sv.height();
  SegmentationResult res;

  const auto [mn, mx] = std::minmax_element(sv.data.values().begin(), sv.data.values().end());
  if (!(*mx - *mn > p.min_contrast)) {
    res.level_set = LevelSet{Frame(w, h, 1.0)};
    res.mask = Mask(w, h);
    res.stats = {*mn, *mn};
    return res;
  }

  const double mu = effective_mu(p, sv);
  LevelSet ls = warm_start && warm_start->u_grid.same_shape(sv.data) ? *warm_start
                                                                      : checkerboard_level_set(w, h);
  auto stats_or_reinit = [&]() {
    try {
      return region_means(sv, ls, p.epsilon);
    } catch (const DegenerateRegion&) {
      if (res.reinitializations > 0) throw;
      ++res.reinitializations;
      ls = checkerboard_level_set(w, h, 5.0);
      return region_means(sv, ls, p.epsilon);
    }
  };

  RegionStats stats = stats_or_reinit();
  double energy = chan_vese_energy(ls, sv, stats, p.cv_lambda, mu, p.epsilon);
  res.energies.push_back(energy);
  const double n = static_cast<double>(w) * h;
  // Adaptive step: starts at dt, doubles after every accepted step and is
  // halved while the criterion would rise.
  double step = p.dt;
  int quiet = 0;
  for (int it = 0; it < p.max_iters; ++it) {
    const Frame force = evolution_force(ls, sv, stats, p.cv_lambda, mu);
    LevelSet next = apply_force(ls, force, step, p.epsilon);
    for (int halving = 0; halving < kMaxStepHalvings; ++halving) {
      if (chan_vese_energy(next, sv, stats, p.cv_lambda, mu, p.epsilon) <= energy) break;
      step *= 0.5;
      next = apply_force(ls, force, step, p.epsilon);
    }
    step = std::min(2.0 * step, kMaxStep);
    std::size_t flips = 0;
    for (std::size_t i = 0; i < next.u_grid.size(); ++i)
      flips += (next.u_grid[i] < 0.0) != (ls.u_grid[i] < 0.0);
    ls = std::move(next);
    stats = stats_or_reinit();
    energy = chan_vese_energy(ls, sv, stats, p.cv_lambda, mu, p.epsilon);
    res.energies.push_back(energy);
    res.iterations = it + 1;
    quiet = static_cast<double>(flips) / n < p.stop_tol ? quiet + 1 : 0;
    if (quiet >= kQuietSteps) break;
  }

  // The two phases are symmetric in the criterion; the moving phase is the
  // one with the larger mean speed.
  if (stats.c1 < stats.c2) {
    for (double& u : ls.u_grid.values()) u = -u;
    std::swap(stats.c1, stats.c2);
  }
  res.stats = stats;
  res.mask = ls.inside();
  res.objects = connected_components(res.mask, p.min_area);
  res.level_set = std::move(ls);
  return res;
}

}  // namespace mavsir
