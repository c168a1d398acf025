#pragma once

// Hough orientation profile. Every edge pixel votes once, for the line
// through it normal to its gradient, so collinear edge pixels share a cell.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/image.hpp"
#include "mavsir/imgcore.hpp"

namespace mavsir {

inline constexpr int kHoughTheta = 36;
inline constexpr int kHoughRho = 64;
inline constexpr int kHoughMinSide = 16;

/// kHoughTheta x kHoughRho vote counts, theta-major. Theta bin k is centred on
/// k * 5 degrees; rho is measured from the frame centre.
inline std::vector<double> hough_accumulator(const Mask& edges, const Frame& gx, const Frame& gy) {
  const int w = edges.width(), h = edges.height();
  std::vector<double> acc(kHoughTheta * kHoughRho, 0.0);
  const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
  const double rmax = std::hypot(cx, cy) + 1.0;
  const double tstep = std::numbers::pi / kHoughTheta;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!edges(x, y)) continue;
      double th = std::atan2(gy(x, y), gx(x, y));
      if (th < 0) th += std::numbers::pi;
      const int tb = static_cast<int>(std::lround(th / tstep)) % kHoughTheta;
      const double t = tb * tstep;
      const double rho = (x - cx) * std::cos(t) + (y - cy) * std::sin(t);
      const int rb = std::clamp(static_cast<int>((rho + rmax) / (2 * rmax) * kHoughRho), 0, kHoughRho - 1);
      acc[tb * kHoughRho + rb] += 1.0;
    }
  }
  return acc;
}

/// Per-theta maximum over rho, L1-normalized; all-zero for an empty edge map.
inline FeatureVector hough_hist(const Frame& f) {
  detail::require(f.width() >= kHoughMinSide && f.height() >= kHoughMinSide,
                  "hough_hist: frame smaller than 16x16");
  Frame gx, gy;
  const Mask edges = edge_map(f, &gx, &gy);
  const auto acc = hough_accumulator(edges, gx, gy);
  FeatureVector out{DescriptorId::HoughHist, RegionClass::KeyFrame, std::vector<double>(kHoughTheta, 0.0)};
  for (int t = 0; t < kHoughTheta; ++t)
    out.values[t] = *std::max_element(acc.begin() + t * kHoughRho, acc.begin() + (t + 1) * kHoughRho);
  detail::l1_normalize(out.values);
  return out;
}

}  // namespace mavsir
