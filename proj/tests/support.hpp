#pragma once

// Shared fixtures for the unit tests: synthetic frames and small oracles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "mavsir/image.hpp"
#include "mavsir/synth.hpp"

namespace testing_support {

using mavsir::Frame;

inline Frame gaussian_blob(int w, int h, double cx, double cy, double sigma) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f(x, y) = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * sigma * sigma));
  return f;
}

inline Frame random_frame(int w, int h, mavsir::Rng& rng) {
  Frame f(w, h);
  for (auto& v : f.values()) v = rng.uniform();
  return f;
}

inline double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

/// Integer shift (dx, dy) minimizing the SSD between f2(x+dx, y+dy) and
/// f1(x, y) over pixels that stay in frame for every candidate.
inline std::pair<int, int> ssd_shift(const Frame& f1, const Frame& f2, int range) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<int, int> arg{0, 0};
  for (int dy = -range; dy <= range; ++dy) {
    for (int dx = -range; dx <= range; ++dx) {
      double s = 0.0;
      for (int y = range; y < f1.height() - range; ++y)
        for (int x = range; x < f1.width() - range; ++x) {
          const double d = f2(x + dx, y + dy) - f1(x, y);
          s += d * d;
        }
      if (s < best) {
        best = s;
        arg = {dx, dy};
      }
    }
  }
  return arg;
}

/// Median (u, v) over the pixels where the blob centred at (cx, cy) is
/// above 10% of its peak in either frame.
template <typename Flow>
std::pair<double, double> median_flow_on_blob(const Flow& fl, const Frame& f1, const Frame& f2) {
  std::vector<double> us, vs;
  for (int y = 0; y < f1.height(); ++y)
    for (int x = 0; x < f1.width(); ++x)
      if (std::max(f1(x, y), f2(x, y)) > 0.1) {
        us.push_back(fl.u(x, y));
        vs.push_back(fl.v(x, y));
      }
  return {median(us), median(vs)};
}

}  // namespace testing_support
