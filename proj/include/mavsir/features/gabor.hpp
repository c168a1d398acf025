#pragma once

// Gabor bank applied in the frequency domain: each filter is a Gaussian
// bump centred on (f0 cos th, f0 sin th), one-sided, so the filtered image is
// the analytic response and its magnitude the local energy.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/fft.hpp"
#include "mavsir/image.hpp"
#include "mavsir/imgcore.hpp"

namespace mavsir {

inline constexpr std::array<double, 4> kGaborFrequencies{0.05, 0.1, 0.2, 0.4};  // cycles / px
inline constexpr int kGaborOrientations = 6;
inline constexpr int kGaborMinSide = 16;

inline double gabor_orientation(int k) { return k * std::numbers::pi / kGaborOrientations; }

/// Frequency response at (fx, fy) cycles/px. One octave radial bandwidth and
/// half the orientation spacing as angular half-width, both at half maximum.
inline double gabor_response(double fx, double fy, double f0, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double fu = fx * c + fy * s, fv = -fx * s + fy * c;
  const double hm = std::sqrt(2.0 * std::log(2.0));
  const double su = f0 / (2.0 * std::numbers::sqrt2) / hm;
  const double sv = f0 * std::tan(std::numbers::pi / (2.0 * kGaborOrientations)) / hm;
  return std::exp(-0.5 * ((fu - f0) * (fu - f0) / (su * su) + fv * fv / (sv * sv)));
}

/// Magnitude response of every filter, scale-major, cropped back to the input.
inline std::vector<Frame> gabor_magnitudes(const Frame& f) {
  const int w = f.width(), h = f.height();
  detail::require(w >= kGaborMinSide && h >= kGaborMinSide, "gabor_bank: frame smaller than 16x16");
  // Mirror padding by half the size on every side.
  const int px = w / 2, py = h / 2, wp = w + 2 * px, hp = h + 2 * py;
  detail::Spectrum img(static_cast<std::size_t>(wp) * hp);
  for (int y = 0; y < hp; ++y)
    for (int x = 0; x < wp; ++x)
      img[static_cast<std::size_t>(y) * wp + x] = f(reflect_index(x - px, w), reflect_index(y - py, h));
  const detail::Spectrum spec = detail::fft2(img, wp, hp);

  auto freq = [](int k, int n) { return (k <= n / 2 ? k : k - n) / static_cast<double>(n); };
  std::vector<Frame> out;
  for (double f0 : kGaborFrequencies) {
    for (int o = 0; o < kGaborOrientations; ++o) {
      const double th = gabor_orientation(o);
      detail::Spectrum filtered(spec.size());
      for (int y = 0; y < hp; ++y) {
        for (int x = 0; x < wp; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * wp + x;
          filtered[i] = (x == 0 && y == 0) ? 0.0 : spec[i] * gabor_response(freq(x, wp), freq(y, hp), f0, th);
        }
      }
      const detail::Spectrum resp = detail::fft2(filtered, wp, hp, true);
      Frame mag(w, h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mag(x, y) = std::abs(resp[static_cast<std::size_t>(y + py) * wp + x + px]);
      out.push_back(std::move(mag));
    }
  }
  return out;
}

/// (mean, std) of each filter magnitude before normalization.
inline std::vector<double> gabor_bank_raw(const Frame& f) {
  std::vector<double> out;
  out.reserve(48);
  for (const Frame& m : gabor_magnitudes(f)) {
    double s = 0.0, s2 = 0.0;
    for (double v : m.values()) {
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(m.size());
    const double mean = s / n;
    out.push_back(mean);
    out.push_back(std::sqrt(std::max(0.0, s2 / n - mean * mean)));
  }
  return out;
}

inline FeatureVector gabor_bank(const Frame& f) {
  FeatureVector out{DescriptorId::GaborTexture, RegionClass::KeyFrame, gabor_bank_raw(f)};
  detail::l2_normalize(out.values);
  return out;
}

}  // namespace mavsir
