#pragma once

// Orthonormal Daubechies-4 (two vanishing moments) with periodic extension.

#include <array>
#include <cmath>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/image.hpp"
#include "mavsir/imgcore.hpp"
#include "mavsir/optflow.hpp"

namespace mavsir {

inline constexpr int kWaveletLevels = 3;
inline constexpr int kWaveletMinSide = 16;

namespace detail {

inline const std::array<double, 4>& db2_lowpass() {
  static const std::array<double, 4> h = [] {
    const double s3 = std::sqrt(3.0), n = 4.0 * std::sqrt(2.0);
    return std::array<double, 4>{(1 + s3) / n, (3 + s3) / n, (3 - s3) / n, (1 - s3) / n};
  }();
  return h;
}

/// One periodic analysis step on a strided line of even length n.
inline void dwt_line(const double* in, std::size_t stride, int n, std::vector<double>& lo,
                     std::vector<double>& hi) {
  const auto& h = db2_lowpass();
  lo.assign(n / 2, 0.0);
  hi.assign(n / 2, 0.0);
  for (int i = 0; i < n / 2; ++i) {
    for (int k = 0; k < 4; ++k) {
      const double x = in[static_cast<std::size_t>((2 * i + k) % n) * stride];
      lo[i] += h[k] * x;
      hi[i] += ((k % 2) ? -1.0 : 1.0) * h[3 - k] * x;
    }
  }
}

}  // namespace detail

/// Band order: LL3, LH3, HL3, HH3, LH2, HL2, HH2, LH1, HL1, HH1, where the
/// first letter is the filter along x and the second along y.
using WaveletBands = std::array<std::vector<double>, 3 * kWaveletLevels + 1>;

/// Three-level 2D decomposition. Sides are first reflected up to a multiple of 8.
inline WaveletBands wavelet_decompose(const Frame& f) {
  detail::require(f.width() >= kWaveletMinSide && f.height() >= kWaveletMinSide,
                  "wavelet: frame smaller than 16x16");
  constexpr int kAlign = 1 << kWaveletLevels;
  int w = (f.width() + kAlign - 1) / kAlign * kAlign, h = (f.height() + kAlign - 1) / kAlign * kAlign;
  std::vector<double> cur(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      cur[static_cast<std::size_t>(y) * w + x] = f(reflect_index(x, f.width()), reflect_index(y, f.height()));

  WaveletBands bands;
  std::vector<double> lo, hi;
  for (int level = 1; level <= kWaveletLevels; ++level) {
    const int hw = w / 2, hh = h / 2;
    // Rows: L and H halves along x.
    std::vector<double> rows_l(static_cast<std::size_t>(hw) * h), rows_h(rows_l.size());
    for (int y = 0; y < h; ++y) {
      detail::dwt_line(&cur[static_cast<std::size_t>(y) * w], 1, w, lo, hi);
      std::copy(lo.begin(), lo.end(), rows_l.begin() + static_cast<std::ptrdiff_t>(y) * hw);
      std::copy(hi.begin(), hi.end(), rows_h.begin() + static_cast<std::ptrdiff_t>(y) * hw);
    }
    // Columns of each half.
    auto columns = [&](const std::vector<double>& src, std::vector<double>& out_l, std::vector<double>& out_h) {
      out_l.assign(static_cast<std::size_t>(hw) * hh, 0.0);
      out_h.assign(out_l.size(), 0.0);
      for (int x = 0; x < hw; ++x) {
        detail::dwt_line(&src[x], hw, h, lo, hi);
        for (int y = 0; y < hh; ++y) {
          out_l[static_cast<std::size_t>(y) * hw + x] = lo[y];
          out_h[static_cast<std::size_t>(y) * hw + x] = hi[y];
        }
      }
    };
    std::vector<double> ll, lh, hl, hhb;
    columns(rows_l, ll, lh);
    columns(rows_h, hl, hhb);
    const int base = 3 * (kWaveletLevels - level) + 1;
    bands[base] = std::move(lh);
    bands[base + 1] = std::move(hl);
    bands[base + 2] = std::move(hhb);
    cur = std::move(ll);
    w = hw;
    h = hh;
  }
  bands[0] = std::move(cur);
  return bands;
}

/// Mean squared coefficient per band, before normalization.
inline std::vector<double> wavelet_energy_raw(const Frame& f) {
  std::vector<double> e;
  for (const auto& band : wavelet_decompose(f)) {
    double s = 0.0;
    for (double c : band) s += c * c;
    e.push_back(s / static_cast<double>(band.size()));
  }
  return e;
}

inline FeatureVector wavelet_energy(const Frame& f) {
  FeatureVector out{DescriptorId::WaveletEnergy, RegionClass::KeyFrame, wavelet_energy_raw(f)};
  detail::l1_normalize(out.values);
  return out;
}

/// Wavelet band energies of the flow speed |(u, v)|.
inline FeatureVector motion_activity(const FlowField& flow) {
  FeatureVector out = wavelet_energy(flow_magnitude(flow));
  out.id = DescriptorId::MotionActivity;
  return out;
}

}  // namespace mavsir
