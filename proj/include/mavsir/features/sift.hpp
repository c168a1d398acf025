#pragma once

// SIFT-style descriptor of a whole region: no keypoint detection, the box
// itself is the support. Gradients are sampled on a 16x16 grid rotated to the
// dominant orientation, so the descriptor follows in-plane rotations.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/features/gabor.hpp"
#include "mavsir/image.hpp"

namespace mavsir {

inline constexpr int kSiftMinSide = 8;
inline constexpr int kSiftSamples = 16;  // per side of the sampling grid
inline constexpr int kSiftCells = 4;
inline constexpr int kSiftOrientBins = 8;
inline constexpr int kSiftDominantBins = 36;
inline constexpr double kSiftClamp = 0.2;

namespace detail {

inline double sample_bilinear(const Frame& f, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double ax = x - x0, ay = y - y0;
  return (1 - ay) * ((1 - ax) * f.at_clamped(x0, y0) + ax * f.at_clamped(x0 + 1, y0)) +
         ay * ((1 - ax) * f.at_clamped(x0, y0 + 1) + ax * f.at_clamped(x0 + 1, y0 + 1));
}

struct GradSample {
  double mag, angle;  // angle in [0, 2pi)
};

inline GradSample gradient_at(const Frame& f, double x, double y) {
  const double gx = 0.5 * (sample_bilinear(f, x + 1, y) - sample_bilinear(f, x - 1, y));
  const double gy = 0.5 * (sample_bilinear(f, x, y + 1) - sample_bilinear(f, x, y - 1));
  double a = std::atan2(gy, gx);
  if (a < 0) a += 2 * std::numbers::pi;
  return {std::hypot(gx, gy), a};
}

inline double wrap_angle(double a) {
  constexpr double k2Pi = 2 * std::numbers::pi;
  a = std::fmod(a, k2Pi);
  return a < 0 ? a + k2Pi : a;
}

struct SiftFrame {
  double cx, cy, radius;

  // Grid sample (i, j) in the frame rotated by theta.
  std::pair<double, double> point(int i, int j, double theta) const {
    const double step = 2 * radius / kSiftSamples;
    const double u = -radius + (i + 0.5) * step, v = -radius + (j + 0.5) * step;
    const double c = std::cos(theta), s = std::sin(theta);
    return {cx + u * c - v * s, cy + u * s + v * c};
  }
  double weight(int i, int j) const {
    const double step = 2 * radius / kSiftSamples;
    const double u = -radius + (i + 0.5) * step, v = -radius + (j + 0.5) * step;
    return std::exp(-(u * u + v * v) / (2 * radius * radius));
  }
};

inline SiftFrame sift_frame(const BBox& b) {
  return {b.x + 0.5 * (b.w - 1), b.y + 0.5 * (b.h - 1), 0.5 * std::min(b.w, b.h)};
}

}  // namespace detail

/// Peak of the magnitude-weighted 36-bin orientation histogram, refined by a
/// parabola through the peak and its neighbours. 0 for a flat region.
inline double dominant_orientation(const Frame& f, const BBox& b) {
  const auto fr = detail::sift_frame(b);
  std::array<double, kSiftDominantBins> hist{};
  const double bw = 2 * std::numbers::pi / kSiftDominantBins;
  for (int j = 0; j < kSiftSamples; ++j) {
    for (int i = 0; i < kSiftSamples; ++i) {
      const auto [x, y] = fr.point(i, j, 0.0);
      const auto g = detail::gradient_at(f, x, y);
      const double pos = g.angle / bw - 0.5;
      const int lo = static_cast<int>(std::floor(pos));
      const double a = pos - lo;
      const double m = g.mag * fr.weight(i, j);
      hist[(lo + kSiftDominantBins) % kSiftDominantBins] += (1 - a) * m;
      hist[(lo + 1) % kSiftDominantBins] += a * m;
    }
  }
  std::array<double, kSiftDominantBins> smooth{};
  for (int k = 0; k < kSiftDominantBins; ++k)
    smooth[k] = (hist[(k + kSiftDominantBins - 1) % kSiftDominantBins] + hist[k] +
                 hist[(k + 1) % kSiftDominantBins]) / 3.0;
  const int peak = static_cast<int>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  if (!(smooth[peak] > 0.0)) return 0.0;
  const double l = smooth[(peak + kSiftDominantBins - 1) % kSiftDominantBins];
  const double r = smooth[(peak + 1) % kSiftDominantBins];
  const double denom = l - 2 * smooth[peak] + r;
  const double shift = denom < 0.0 ? 0.5 * (l - r) / denom : 0.0;
  return detail::wrap_angle((peak + 0.5 + shift) * bw);
}

inline FeatureVector sift_region(const Frame& f, const BBox& b) {
  detail::require(b.w >= kSiftMinSide && b.h >= kSiftMinSide, "sift_region: box smaller than 8x8");
  detail::require(b.x >= 0 && b.y >= 0 && b.x + b.w <= f.width() && b.y + b.h <= f.height(),
                  "sift_region: box outside frame");
  const auto fr = detail::sift_frame(b);
  const double theta = dominant_orientation(f, b);
  FeatureVector out{DescriptorId::Sift, RegionClass::KeyFrame, std::vector<double>(128, 0.0)};
  const double ob = 2 * std::numbers::pi / kSiftOrientBins;
  const int per_cell = kSiftSamples / kSiftCells;
  auto add = [&](int cx, int cy, int o, double v) {
    if (cx < 0 || cy < 0 || cx >= kSiftCells || cy >= kSiftCells) return;
    out.values[(cy * kSiftCells + cx) * kSiftOrientBins + (o + kSiftOrientBins) % kSiftOrientBins] += v;
  };
  for (int j = 0; j < kSiftSamples; ++j) {
    for (int i = 0; i < kSiftSamples; ++i) {
      const auto [x, y] = fr.point(i, j, theta);
      const auto g = detail::gradient_at(f, x, y);
      const double m = g.mag * fr.weight(i, j);
      if (m == 0.0) continue;
      // Trilinear distribution over neighbouring cells and orientation bins.
      const double cu = (i + 0.5) / per_cell - 0.5, cv = (j + 0.5) / per_cell - 0.5;
      const double co = detail::wrap_angle(g.angle - theta) / ob;
      const int u0 = static_cast<int>(std::floor(cu)), v0 = static_cast<int>(std::floor(cv));
      const int o0 = static_cast<int>(std::floor(co));
      const double au = cu - u0, av = cv - v0, ao = co - o0;
      for (int dv = 0; dv <= 1; ++dv)
        for (int du = 0; du <= 1; ++du)
          for (int d = 0; d <= 1; ++d)
            add(u0 + du, v0 + dv, o0 + d,
                m * (du ? au : 1 - au) * (dv ? av : 1 - av) * (d ? ao : 1 - ao));
    }
  }
  detail::l2_normalize(out.values);
  for (double& v : out.values) v = std::min(v, kSiftClamp);
  detail::l2_normalize(out.values);
  return out;
}

/// SIFT of the box followed by the Gabor bank of the box, each L2-normalized.
/// Boxes smaller than the Gabor minimum are grown inside the frame.
inline FeatureVector sift_gabor(const Frame& f, const BBox& b) {
  FeatureVector out{DescriptorId::SiftGabor, RegionClass::KeyFrame, sift_region(f, b).values};
  const BBox g = grow_to(b, kGaborMinSide, kGaborMinSide, f.width(), f.height());
  const auto gab = gabor_bank(crop(f, g)).values;
  out.values.insert(out.values.end(), gab.begin(), gab.end());
  return out;
}

}  // namespace mavsir
