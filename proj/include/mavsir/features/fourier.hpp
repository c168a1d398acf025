#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/fft.hpp"
#include "mavsir/image.hpp"
#include "mavsir/imgcore.hpp"

namespace mavsir {

inline constexpr int kFourierRows = 32;  // vertical frequency ky
inline constexpr int kFourierCols = 16;  // horizontal frequency kx >= 0
inline constexpr int kFourierMinSide = 32;

/// Area-weighted resampling of a row-major in_w x in_h grid onto out_w x out_h
/// cells covering the same extent. Each output is the coverage-weighted mean.
inline std::vector<double> area_resample(const std::vector<double>& in, int in_w, int in_h, int out_w,
                                         int out_h) {
  detail::require(in.size() == static_cast<std::size_t>(in_w) * in_h, "area_resample: size mismatch");
  // Per-axis coverage weights: out cell o spans [o*n/m, (o+1)*n/m).
  auto weights = [](int n, int m) {
    std::vector<std::vector<std::pair<int, double>>> w(m);
    const double step = static_cast<double>(n) / m;
    for (int o = 0; o < m; ++o) {
      const double a = o * step, b = (o + 1) * step;
      for (int i = static_cast<int>(std::floor(a)); i < n && i < b; ++i) {
        const double cover = std::min(b, i + 1.0) - std::max(a, static_cast<double>(i));
        if (cover > 0.0) w[o].emplace_back(i, cover);
      }
    }
    return w;
  };
  const auto wx = weights(in_w, out_w), wy = weights(in_h, out_h);
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h, 0.0);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      double acc = 0.0, wsum = 0.0;
      for (auto [iy, cy] : wy[oy]) {
        for (auto [ix, cx] : wx[ox]) {
          acc += cy * cx * in[static_cast<std::size_t>(iy) * in_w + ix];
          wsum += cy * cx;
        }
      }
      out[static_cast<std::size_t>(oy) * out_w + ox] = wsum > 0.0 ? acc / wsum : 0.0;
    }
  }
  return out;
}

/// Spectrum layout: 32 rows of vertical frequency ky = 0..H-1 (unshifted) by
/// 16 columns of horizontal frequency kx = 0..W/2, row-major.
inline FeatureVector fourier_edge_from_edges(const Mask& edges) {
  const int w = edges.width(), h = edges.height();
  detail::require(w >= kFourierMinSide && h >= kFourierMinSide, "fourier_edge: frame smaller than 32x32");
  FeatureVector out{DescriptorId::FourierEdge, RegionClass::KeyFrame,
                    std::vector<double>(kFourierRows * kFourierCols, 0.0)};
  if (mask_count(edges) == 0) return out;

  detail::Spectrum img(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) img[i] = edges[i] ? 1.0 : 0.0;
  const detail::Spectrum spec = detail::fft2(img, w, h);

  // 3x3 box smoothing of the amplitude, periodic like the spectrum itself.
  const int half_w = w / 2 + 1;
  std::vector<double> amp(static_cast<std::size_t>(half_w) * h);
  for (int ky = 0; ky < h; ++ky) {
    for (int kx = 0; kx < half_w; ++kx) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          s += std::abs(spec[static_cast<std::size_t>((ky + dy + h) % h) * w + (kx + dx + w) % w]);
      amp[static_cast<std::size_t>(ky) * half_w + kx] = s / 9.0;
    }
  }
  out.values = area_resample(amp, half_w, h, kFourierCols, kFourierRows);
  detail::l1_normalize(out.values);
  return out;
}

inline FeatureVector fourier_edge(const Frame& f) { return fourier_edge_from_edges(edge_map(f)); }

}  // namespace mavsir
