#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mavsir/binio.hpp"
#include "mavsir/error.hpp"
#include "mavsir/image.hpp"
#include "mavsir/imgcore.hpp"

namespace mavsir {

struct FlowField {
  Frame u, v;  // pixels per frame step

  FlowField() = default;
  FlowField(int width, int height) : u(width, height), v(width, height) {}

  int width() const { return u.width(); }
  int height() const { return u.height(); }
  bool operator==(const FlowField&) const = default;
};

/// Horn-Schunck parameters. The smoothness weight of the classical update is
/// alpha^2 = 1 / hs_lambda.
struct HsParams {
  double hs_lambda = 100.0;
  int iterations_per_level = 200;
  int pyramid_levels = 3;
  double convergence_eps = 1e-4;

  double alpha_sq() const { return 1.0 / hs_lambda; }

  void validate() const {
    detail::require<ConfigError>(hs_lambda > 0.0 && std::isfinite(hs_lambda), "hs_lambda must be > 0");
    detail::require<ConfigError>(iterations_per_level >= 1, "iterations_per_level must be >= 1");
    detail::require<ConfigError>(pyramid_levels >= 1, "pyramid_levels must be >= 1");
    detail::require<ConfigError>(convergence_eps >= 0.0, "convergence_eps must be >= 0");
  }
};

struct SpeedMap {
  Frame data;
  double threshold = 0.0;
  double sigma = 0.0;

  int width() const { return data.width(); }
  int height() const { return data.height(); }
};

namespace detail {

// Per-edge weight of the discrete smoothness term. With four neighbours the
// block minimizer reduces to the classical alpha^2 denominator.
inline double edge_weight(double hs_lambda) { return 0.25 / hs_lambda; }

}  // namespace detail

/// Discrete Horn-Schunck energy
///   sum_p (Ix u + Iy v + It)^2 + (alpha^2/4) sum_{edges pq} (u_p-u_q)^2 + (v_p-v_q)^2
/// over 4-neighbour edges inside the frame. This is the objective that
/// gauss_seidel_sweep minimizes exactly, one pixel at a time.
inline double hs_energy(const FlowField& flow, const GradientField& g, double hs_lambda) {
  const double s = detail::edge_weight(hs_lambda);
  const int w = flow.width(), h = flow.height();
  double data = 0.0, smooth = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = flow.u(x, y), v = flow.v(x, y);
      const double r = g.ix(x, y) * u + g.iy(x, y) * v + g.it(x, y);
      data += r * r;
      if (x + 1 < w) {
        const double du = flow.u(x + 1, y) - u, dv = flow.v(x + 1, y) - v;
        smooth += du * du + dv * dv;
      }
      if (y + 1 < h) {
        const double du = flow.u(x, y + 1) - u, dv = flow.v(x, y + 1) - v;
        smooth += du * du + dv * dv;
      }
    }
  }
  return data + s * smooth;
}

/// One lexicographic Gauss-Seidel sweep, in place. Each pixel's (u, v) is set
/// to the exact minimizer of hs_energy with all other pixels fixed:
///   u = ubar - Ix (Ix ubar + Iy vbar + It) / (D + Ix^2 + Iy^2)
/// with ubar, vbar the mean over in-frame 4-neighbours and D = alpha^2 n/4
/// (n = in-frame neighbour count; D = alpha^2 in the interior).
/// Returns the mean absolute change over both components.
inline double gauss_seidel_sweep(FlowField& flow, const GradientField& g, double hs_lambda) {
  detail::require(flow.u.same_shape(g.ix) && flow.v.same_shape(g.ix),
                  "gauss_seidel_sweep: shape mismatch");
  const double s = detail::edge_weight(hs_lambda);
  const int w = flow.width(), h = flow.height();
  double change = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double su = 0.0, sv = 0.0;
      int n = 0;
      auto take = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        su += flow.u(nx, ny);
        sv += flow.v(nx, ny);
        ++n;
      };
      take(x - 1, y);
      take(x + 1, y);
      take(x, y - 1);
      take(x, y + 1);
      const double ix = g.ix(x, y), iy = g.iy(x, y), it = g.it(x, y);
      double ubar = 0.0, vbar = 0.0, denom = ix * ix + iy * iy;
      if (n > 0) {
        ubar = su / n;
        vbar = sv / n;
        denom += s * n;
      }
      double nu = ubar, nv = vbar;
      if (denom > 0.0) {
        const double t = (ix * ubar + iy * vbar + it) / denom;
        nu -= ix * t;
        nv -= iy * t;
      }
      change += std::abs(nu - flow.u(x, y)) + std::abs(nv - flow.v(x, y));
      flow.u(x, y) = nu;
      flow.v(x, y) = nv;
    }
  }
  return change / (2.0 * static_cast<double>(w) * h);
}

/// Bilinear upsampling of a coarse flow to the given size; vectors scaled by
/// the resolution ratio (2 between pyramid levels).
inline FlowField upsample_flow(const FlowField& coarse, int width, int height) {
  FlowField out;
  out.u = resize_bilinear(coarse.u, width, height);
  out.v = resize_bilinear(coarse.v, width, height);
  const double sx = static_cast<double>(width) / coarse.width();
  const double sy = static_cast<double>(height) / coarse.height();
  for (double& x : out.u.values()) x *= sx;
  for (double& y : out.v.values()) y *= sy;
  return out;
}

/// Per-level diagnostics of a pyramidal solve, finest level last.
struct HsReport {
  std::vector<int> sweeps;
  std::vector<std::vector<double>> energies;  // filled when tracking is on
};

/// Coarse-to-fine Horn-Schunck: zero init at the coarsest level, each finer
/// level warm-started from the upsampled coarser solution.
inline FlowField horn_schunck_pyramidal(const Frame& f1, const Frame& f2, const HsParams& p,
                                        HsReport* report = nullptr, bool track_energy = false) {
  p.validate();
  detail::require(f1.same_shape(f2), "horn_schunck: frame shape mismatch");
  const Pyramid p1 = build_pyramid(f1, p.pyramid_levels);
  const Pyramid p2 = build_pyramid(f2, p.pyramid_levels);

  FlowField flow;
  for (int level = p.pyramid_levels - 1; level >= 0; --level) {
    const Frame& a = p1[level];
    const Frame& b = p2[level];
    flow = flow.u.empty() ? FlowField(a.width(), a.height())
                          : upsample_flow(flow, a.width(), a.height());
    const GradientField g = gradients(a, b);
    std::vector<double> energies;
    if (track_energy) energies.push_back(hs_energy(flow, g, p.hs_lambda));
    int sweeps = 0;
    while (sweeps < p.iterations_per_level) {
      const double delta = gauss_seidel_sweep(flow, g, p.hs_lambda);
      ++sweeps;
      if (track_energy) energies.push_back(hs_energy(flow, g, p.hs_lambda));
      if (delta < p.convergence_eps) break;
    }
    if (report) {
      report->sweeps.push_back(sweeps);
      report->energies.push_back(std::move(energies));
    }
  }
  return flow;
}

/// |flow|, zeroed below `threshold`, then Gaussian-smoothed.
inline SpeedMap speed_map(const FlowField& flow, double threshold, double sigma) {
  detail::require<ConfigError>(threshold >= 0.0, "speed threshold must be >= 0");
  detail::require<ConfigError>(sigma > 0.0, "speed sigma must be > 0");
  Frame s(flow.width(), flow.height());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double m = std::hypot(flow.u[i], flow.v[i]);
    s[i] = m < threshold ? 0.0 : m;
  }
  SpeedMap out{gaussian_blur(s, sigma), threshold, sigma};
  for (double& x : out.data.values()) x = std::max(x, 0.0);
  return out;
}

inline Frame flow_magnitude(const FlowField& flow) {
  Frame m(flow.width(), flow.height());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::hypot(flow.u[i], flow.v[i]);
  return m;
}

// ---------------------------------------------------------------------------
// MAVFLOW1 raster: "MAVFLOW1", u32 width, u32 height (little endian), then the
// u plane and the v plane as row-major little-endian float32.
// ---------------------------------------------------------------------------

inline constexpr char kFlowMagic[] = "MAVFLOW1";

inline void write_flow(std::ostream& out, const FlowField& flow) {
  detail::put_magic(out, kFlowMagic, 8);
  detail::put_u32(out, static_cast<std::uint32_t>(flow.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (double x : flow.u.values()) detail::put_f32(out, static_cast<float>(x));
  for (double x : flow.v.values()) detail::put_f32(out, static_cast<float>(x));
}

inline FlowField read_flow(std::istream& in) {
  detail::expect_magic(in, kFlowMagic, 8);
  const auto w = detail::get_u32(in), h = detail::get_u32(in);
  if (w < 1 || h < 1 || w > 1u << 15 || h > 1u << 15) throw DataError("flow dump: bad dimensions");
  FlowField flow(static_cast<int>(w), static_cast<int>(h));
  for (double& x : flow.u.values()) x = detail::get_f32(in);
  for (double& x : flow.v.values()) x = detail::get_f32(in);
  return flow;
}

inline void write_flow_file(const std::string& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_flow(out, flow);
}

inline FlowField read_flow_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_flow(in);
}

}  // namespace mavsir
