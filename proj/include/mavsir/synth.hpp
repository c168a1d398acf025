#pragma once

// Deterministic synthetic surveillance scenes: a static textured background
// with rectangular movers translating (and optionally growing) over time.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mavsir/image.hpp"

namespace mavsir {

/// mt19937_64 with distribution code written out, so streams are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do u1 = uniform(); while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class MoverKind { Vehicle, Pedestrian };

struct Mover {
  MoverKind kind = MoverKind::Pedestrian;
  double x = 0, y = 0;    // top-left at t = 0
  double w = 8, h = 8;    // size at t = 0
  double vx = 0, vy = 0;  // px / frame
  double growth = 0;      // size increase px / frame (approaching the camera)
  std::array<double, 3> color{0.8, 0.8, 0.8};
  double texture_period = 4.0;
  double texture_amp = 0.15;

  BBox box_at(int t) const {
    const double cw = w + growth * t, ch = h + growth * t;
    const double cx = x + vx * t - 0.5 * growth * t, cy = y + vy * t - 0.5 * growth * t;
    return BBox{static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy)),
                static_cast<int>(std::lround(cw)), static_cast<int>(std::lround(ch))};
  }
};

struct Scene {
  int width = 64;
  int height = 64;
  std::uint64_t background_seed = 1;
  std::vector<Mover> movers;
};

namespace detail {

struct Wave {
  double fx, fy, phase, amp;
};

inline std::vector<Wave> background_waves(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Wave> waves(6);
  for (auto& w : waves) {
    const double f = rng.uniform(0.08, 0.22);
    const double th = rng.uniform(0.0, std::numbers::pi);
    w = Wave{f * std::cos(th), f * std::sin(th), rng.uniform(0.0, 2 * std::numbers::pi),
             rng.uniform(0.5, 1.0)};
  }
  return waves;
}

}  // namespace detail

/// Static background: a sum of low-frequency plane waves around mid-gray,
/// tinted differently per channel.
inline ColorFrame render_background(const Scene& s) {
  const auto waves = detail::background_waves(s.background_seed);
  double amp_sum = 0.0;
  for (const auto& w : waves) amp_sum += w.amp;
  ColorFrame c(s.width, s.height);
  constexpr std::array<double, 3> tint{1.0, 0.95, 0.85};
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      double v = 0.0;
      for (const auto& w : waves)
        v += w.amp * std::sin(2 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
      const double g = 0.4 + 0.25 * v / amp_sum;
      for (int k = 0; k < 3; ++k) c.planes[k](x, y) = std::clamp(g * tint[k], 0.0, 1.0);
    }
  }
  return c;
}

/// Frame t of the scene; later movers are drawn over earlier ones.
inline ColorFrame render(const Scene& s, int t) {
  ColorFrame c = render_background(s);
  for (const auto& m : s.movers) {
    const BBox b = m.box_at(t);
    for (int y = std::max(b.y, 0); y < std::min(b.y + b.h, s.height); ++y) {
      for (int x = std::max(b.x, 0); x < std::min(b.x + b.w, s.width); ++x) {
        // Texture is attached to the object so it moves with it.
        const double lx = x - b.x, ly = y - b.y;
        const double tex = m.texture_amp * std::sin(2 * std::numbers::pi * lx / m.texture_period) *
                           std::cos(2 * std::numbers::pi * ly / (1.7 * m.texture_period));
        for (int k = 0; k < 3; ++k) c.planes[k](x, y) = std::clamp(m.color[k] + tex, 0.0, 1.0);
      }
    }
  }
  return c;
}

/// Ground-truth object mask at frame t.
inline Mask truth_mask(const Scene& s, int t) {
  Mask m(s.width, s.height);
  for (const auto& mv : s.movers) {
    const BBox b = mv.box_at(t);
    for (int y = std::max(b.y, 0); y < std::min(b.y + b.h, s.height); ++y)
      for (int x = std::max(b.x, 0); x < std::min(b.x + b.w, s.width); ++x) m(x, y) = 1;
  }
  return m;
}

}  // namespace mavsir
