#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mavsir/error.hpp"
#include "mavsir/image.hpp"

namespace mavsir {

// ---------------------------------------------------------------------------
// Boundary helpers
// ---------------------------------------------------------------------------

/// Symmetric reflection including the edge sample: ... b a | a b c ... c | c b ...
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// ---------------------------------------------------------------------------
// Color
// ---------------------------------------------------------------------------

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline Frame to_grayscale(const ColorFrame& c) {
  Frame out(c.width(), c.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = kLumaR * c.r()[i] + kLumaG * c.g()[i] + kLumaB * c.b()[i];
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian filtering
// ---------------------------------------------------------------------------

/// Normalized 1D Gaussian taps, radius ceil(3 sigma); element `radius` is the center.
inline std::vector<double> gaussian_kernel(double sigma) {
  detail::require<ConfigError>(sigma > 0.0 && std::isfinite(sigma),
                               "gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

/// Separable Gaussian convolution with reflected boundary. Preserves
/// constants; the value range of the input is preserved (convex weights).
inline Frame gaussian_blur(const Frame& f, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = f.width(), h = f.height();

  Frame tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * f(reflect_index(x + i, w), y);
      tmp(x, y) = acc;
    }
  }
  Frame out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(x, reflect_index(y + i, h));
      out(x, y) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pyramid
// ---------------------------------------------------------------------------

struct Pyramid {
  std::vector<Frame> levels;  // level 0 = full resolution

  std::size_t size() const { return levels.size(); }
  const Frame& operator[](std::size_t i) const { return levels[i]; }
};

inline constexpr int kMinPyramidSide = 8;

inline int halved(int n) { return (n + 1) / 2; }

/// Number of levels a w x h frame supports with the coarsest level >= 8x8.
inline int max_pyramid_levels(int w, int h) {
  int levels = 1;
  while (halved(w) >= kMinPyramidSide && halved(h) >= kMinPyramidSide) {
    w = halved(w);
    h = halved(h);
    ++levels;
  }
  return levels;
}

/// 2x decimation keeping even samples; output size is ceil(n/2).
inline Frame decimate(const Frame& f) {
  Frame out(halved(f.width()), halved(f.height()));
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = f(2 * x, 2 * y);
  return out;
}

inline Pyramid build_pyramid(const Frame& f, int levels) {
  detail::require<ConfigError>(levels >= 1, "pyramid needs at least one level");
  if (levels > 1) {
    detail::require<ConfigError>(
        f.width() >= kMinPyramidSide && f.height() >= kMinPyramidSide &&
            levels <= max_pyramid_levels(f.width(), f.height()),
        "too many pyramid levels for frame size " + std::to_string(f.width()) + "x" +
            std::to_string(f.height()));
  }
  Pyramid p;
  p.levels.reserve(levels);
  p.levels.push_back(f);
  for (int l = 1; l < levels; ++l) p.levels.push_back(decimate(gaussian_blur(p.levels.back(), 1.0)));
  return p;
}

/// Bilinear resampling of a plane to the given size (pixel-center aligned).
inline Frame resize_bilinear(const Frame& f, int width, int height) {
  Frame out(width, height);
  const double sx = static_cast<double>(f.width()) / width;
  const double sy = static_cast<double>(f.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, f.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, f.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, f.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, f.width() - 1);
      const double tx = fx - x0;
      const double top = (1 - tx) * f(x0, y0) + tx * f(x1, y0);
      const double bot = (1 - tx) * f(x0, y1) + tx * f(x1, y1);
      out(x, y) = (1 - ty) * top + ty * bot;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spatio-temporal derivatives
// ---------------------------------------------------------------------------

struct GradientField {
  Frame ix, iy, it;

  int width() const { return ix.width(); }
  int height() const { return ix.height(); }
};

/// Horn-Schunck derivative estimates: forward differences averaged over the
/// 2x2x2 cube spanned by (x, x+1) x (y, y+1) x (t, t+1), edges replicated.
inline GradientField gradients(const Frame& f1, const Frame& f2) {
  detail::require(f1.same_shape(f2), "gradients: frame shape mismatch");
  const int w = f1.width(), h = f1.height();
  GradientField g{Frame(w, h), Frame(w, h), Frame(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a00 = f1(x, y), a10 = f1.at_clamped(x + 1, y);
      const double a01 = f1.at_clamped(x, y + 1), a11 = f1.at_clamped(x + 1, y + 1);
      const double b00 = f2(x, y), b10 = f2.at_clamped(x + 1, y);
      const double b01 = f2.at_clamped(x, y + 1), b11 = f2.at_clamped(x + 1, y + 1);
      g.ix(x, y) = 0.25 * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
      g.iy(x, y) = 0.25 * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
      g.it(x, y) = 0.25 * ((b00 - a00) + (b10 - a10) + (b01 - a01) + (b11 - a11));
    }
  }
  return g;
}

/// 3x3 Sobel gradient magnitude with reflected boundary.
inline Frame sobel_magnitude(const Frame& f, Frame* gx_out = nullptr, Frame* gy_out = nullptr) {
  const int w = f.width(), h = f.height();
  Frame mag(w, h), gx(w, h), gy(w, h);
  auto px = [&](int x, int y) { return f(reflect_index(x, w), reflect_index(y, h)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double dy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      gx(x, y) = dx;
      gy(x, y) = dy;
      mag(x, y) = std::hypot(dx, dy);
    }
  }
  if (gx_out) *gx_out = std::move(gx);
  if (gy_out) *gy_out = std::move(gy);
  return mag;
}

/// Otsu threshold over a 256-bin histogram of [0, max(values)].
/// Returns 0 for a constant-zero input.
inline double otsu_threshold(const Frame& f) {
  const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
  const double hi = *mx;
  if (!(hi > 0.0)) return 0.0;
  (void)mn;
  constexpr int kBins = 256;
  std::vector<double> hist(kBins, 0.0);
  for (double v : f.values()) {
    const int b = std::min(kBins - 1, static_cast<int>(v / hi * kBins));
    hist[std::max(b, 0)] += 1.0;
  }
  const double total = static_cast<double>(f.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * hist[i];
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < kBins; ++t) {
    w0 += hist[t];
    if (w0 == 0.0) continue;
    const double w1 = total - w0;
    if (w1 == 0.0) break;
    sum0 += t * hist[t];
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return (best_bin + 1) * hi / kBins;
}

/// Sobel magnitude binarized at the Otsu threshold (strictly above = edge).
inline Mask edge_map(const Frame& f, Frame* gx = nullptr, Frame* gy = nullptr) {
  const Frame mag = sobel_magnitude(f, gx, gy);
  const double t = otsu_threshold(mag);
  Mask m(f.width(), f.height());
  for (std::size_t i = 0; i < mag.size(); ++i) m[i] = (mag[i] > t && mag[i] > 1e-12) ? 1 : 0;
  return m;
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

struct Component {
  int id = 0;
  std::vector<std::size_t> pixels;  // linear indices, ascending
  BBox bbox;

  std::size_t area() const { return pixels.size(); }
};

inline constexpr int kDefaultMinArea = 16;

/// 8-connected labeling. Components are sorted by area (descending, ties by
/// first pixel) and renumbered 0..n-1; those smaller than min_area are dropped.
inline std::vector<Component> connected_components(const Mask& mask,
                                                   int min_area = kDefaultMinArea) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(mask.size(), -1);
  std::vector<Component> comps;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || label[start] >= 0) continue;
    Component c;
    const int id = static_cast<int>(comps.size());
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      c.pixels.push_back(p);
      const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx, ny = py + dy;
          if ((dx == 0 && dy == 0) || !mask.contains(nx, ny)) continue;
          const std::size_t q = mask.index(nx, ny);
          if (mask[q] && label[q] < 0) {
            label[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    std::sort(c.pixels.begin(), c.pixels.end());
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (std::size_t p : c.pixels) {
      const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
      x0 = std::min(x0, px);
      y0 = std::min(y0, py);
      x1 = std::max(x1, px);
      y1 = std::max(y1, py);
    }
    c.bbox = BBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    comps.push_back(std::move(c));
  }
  std::erase_if(comps, [&](const Component& c) {
    return static_cast<int>(c.area()) < min_area;
  });
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.area() > b.area();
  });
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].id = static_cast<int>(i);
  return comps;
}

}  // namespace mavsir
