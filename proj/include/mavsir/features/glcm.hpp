#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mavsir/features/descriptor.hpp"
#include "mavsir/image.hpp"

namespace mavsir {

inline constexpr int kGlcmLevels = 32;

struct Offset {
  int dx, dy;
};

/// 8 compass directions (E, SE, S, SW, W, NW, N, NE) times distances 1..3,
/// direction-major.
inline std::array<Offset, 24> glcm_offsets() {
  constexpr std::array<Offset, 8> dirs{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  std::array<Offset, 24> out{};
  for (int d = 0; d < 8; ++d)
    for (int k = 1; k <= 3; ++k) out[d * 3 + k - 1] = {dirs[d].dx * k, dirs[d].dy * k};
  return out;
}

/// Intensity in [0,1] -> 8-bit -> one of 32 levels.
inline int glcm_level(double v) {
  const int byte = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  return byte / (256 / kGlcmLevels);
}

struct GlcmStats {
  double entropy = 0.0, energy = 1.0, contrast = 0.0, homogeneity = 1.0;
};

/// Symmetric normalized co-occurrence matrix for one offset, row-major
/// kGlcmLevels^2. Pairs count only when both pixels are selected.
inline std::vector<double> glcm_matrix(const Frame& f, Offset off, const Mask* mask = nullptr) {
  std::vector<double> m(kGlcmLevels * kGlcmLevels, 0.0);
  double total = 0.0;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const int x2 = x + off.dx, y2 = y + off.dy;
      if (!f.contains(x2, y2)) continue;
      if (mask && (!(*mask)(x, y) || !(*mask)(x2, y2))) continue;
      const int i = glcm_level(f(x, y)), j = glcm_level(f(x2, y2));
      m[i * kGlcmLevels + j] += 1.0;
      m[j * kGlcmLevels + i] += 1.0;
      total += 2.0;
    }
  }
  if (total > 0.0)
    for (double& p : m) p /= total;
  return m;
}

/// An offset with no valid pair reads as a flat patch.
inline GlcmStats glcm_statistics(const std::vector<double>& p) {
  GlcmStats s{0.0, 0.0, 0.0, 0.0};
  double mass = 0.0;
  for (int i = 0; i < kGlcmLevels; ++i) {
    for (int j = 0; j < kGlcmLevels; ++j) {
      const double v = p[i * kGlcmLevels + j];
      if (v <= 0.0) continue;
      mass += v;
      const double d = i - j;
      s.entropy -= v * std::log(v);
      s.energy += v * v;
      s.contrast += v * d * d;
      s.homogeneity += v / (1.0 + d * d);
    }
  }
  return mass > 0.0 ? s : GlcmStats{};
}

/// (entropy, energy, contrast, homogeneity) for each of the 24 offsets.
inline FeatureVector glcm_stats(const Frame& f, const Mask* mask = nullptr) {
  detail::require(!mask || mask->same_shape(f), "glcm_stats: mask shape mismatch");
  const std::size_t selected = mask ? mask_count(*mask) : f.size();
  if (selected < 2) throw DataError("glcm_stats: fewer than 2 selected pixels");
  FeatureVector out{DescriptorId::CooccurrenceTexture, RegionClass::KeyFrame, {}};
  out.values.reserve(96);
  for (const Offset off : glcm_offsets()) {
    const GlcmStats s = glcm_statistics(glcm_matrix(f, off, mask));
    out.values.insert(out.values.end(), {s.entropy, s.energy, s.contrast, s.homogeneity});
  }
  return out;
}

}  // namespace mavsir
