#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/image.hpp"

namespace mavsir {

struct Hsv {
  double h, s, v;  // h in degrees [0, 360), s and v in [0, 1]
};

inline Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0.0) {
    if (mx == r)
      h = 60.0 * std::fmod((g - b) / d, 6.0);
    else if (mx == g)
      h = 60.0 * ((b - r) / d + 2.0);
    else
      h = 60.0 * ((r - g) / d + 4.0);
    if (h < 0.0) h += 360.0;
  }
  return {h, mx > 0.0 ? d / mx : 0.0, mx};
}

inline constexpr int kHueBins = 8, kSatBins = 4, kValBins = 4;

inline int hsv_bin(const Hsv& c) {
  auto bin = [](double x, double span, int n) {
    return std::clamp(static_cast<int>(x / span * n), 0, n - 1);
  };
  return (bin(c.h, 360.0, kHueBins) * kSatBins + bin(c.s, 1.0, kSatBins)) * kValBins +
         bin(c.v, 1.0, kValBins);
}

/// 8H x 4S x 4V histogram over the selected pixels (all pixels if mask is null).
inline FeatureVector color_hist_hsv(const ColorFrame& c, const Mask* mask = nullptr) {
  detail::require(!mask || mask->same_shape(c.r()), "color_hist_hsv: mask shape mismatch");
  FeatureVector out{DescriptorId::ColorHistHSV, RegionClass::KeyFrame, std::vector<double>(128, 0.0)};
  std::size_t n = 0;
  for (std::size_t i = 0; i < c.r().size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    out.values[hsv_bin(rgb_to_hsv(c.r()[i], c.g()[i], c.b()[i]))] += 1.0;
    ++n;
  }
  if (n == 0) throw DataError("color_hist_hsv: empty mask");
  for (double& x : out.values) x /= static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------
// CIE Lab (sRGB primaries, D65 white)
// ---------------------------------------------------------------------------

struct Lab {
  double l, a, b;
};

inline Lab rgb_to_lab(double r, double g, double b) {
  auto lin = [](double c) {
    c = std::clamp(c, 0.0, 1.0);
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double rl = lin(r), gl = lin(g), bl = lin(b);
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
  auto f = [](double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
  };
  const double fx = f(x / kXn), fy = f(y / kYn), fz = f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct ColorMoments {
  double mean = 0.0, stddev = 0.0, skew = 0.0;  // skew = cbrt(third central moment)
};

/// Population moments of a sample.
inline ColorMoments moments(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const double n = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  return {m, std::sqrt(m2 / n), std::cbrt(m3 / n)};
}

inline constexpr int kMomentGrid = 3;

/// Unnormalized grid moments: cell-major (row, column), then L, a, b, then
/// (mean, std, skew). Cells with no selected pixel contribute zeros.
inline std::vector<double> color_moments_lab_raw(const ColorFrame& c, const Mask* mask = nullptr) {
  const int w = c.width(), h = c.height();
  detail::require(w >= kMomentGrid && h >= kMomentGrid, "color_moments_lab: frame smaller than 3x3");
  detail::require(!mask || mask->same_shape(c.r()), "color_moments_lab: mask shape mismatch");
  std::vector<double> out;
  out.reserve(81);
  for (int gy = 0; gy < kMomentGrid; ++gy) {
    for (int gx = 0; gx < kMomentGrid; ++gx) {
      std::array<std::vector<double>, 3> ch;
      for (int y = gy * h / kMomentGrid; y < (gy + 1) * h / kMomentGrid; ++y) {
        for (int x = gx * w / kMomentGrid; x < (gx + 1) * w / kMomentGrid; ++x) {
          if (mask && !(*mask)(x, y)) continue;
          const Lab p = rgb_to_lab(c.r()(x, y), c.g()(x, y), c.b()(x, y));
          ch[0].push_back(p.l);
          ch[1].push_back(p.a);
          ch[2].push_back(p.b);
        }
      }
      for (const auto& xs : ch) {
        const ColorMoments m = moments(xs);
        out.insert(out.end(), {m.mean, m.stddev, m.skew});
      }
    }
  }
  return out;
}

inline FeatureVector color_moments_lab(const ColorFrame& c, const Mask* mask = nullptr) {
  FeatureVector out{DescriptorId::ColorMomentsLab, RegionClass::KeyFrame, color_moments_lab_raw(c, mask)};
  detail::l2_normalize(out.values);
  return out;
}

}  // namespace mavsir
