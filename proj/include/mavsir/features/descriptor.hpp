#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "mavsir/error.hpp"

namespace mavsir {

enum class DescriptorId {
  ColorHistHSV,
  ColorMomentsLab,
  CooccurrenceTexture,
  GaborTexture,
  FourierEdge,
  Sift,
  SiftGabor,
  WaveletEnergy,
  HoughHist,
  MotionActivity,
};

inline constexpr std::array kAllDescriptors{
    DescriptorId::ColorHistHSV, DescriptorId::ColorMomentsLab, DescriptorId::CooccurrenceTexture,
    DescriptorId::GaborTexture, DescriptorId::FourierEdge,     DescriptorId::Sift,
    DescriptorId::SiftGabor,    DescriptorId::WaveletEnergy,   DescriptorId::HoughHist,
    DescriptorId::MotionActivity,
};

inline constexpr int dimension(DescriptorId id) {
  switch (id) {
    case DescriptorId::ColorHistHSV: return 128;
    case DescriptorId::ColorMomentsLab: return 81;
    case DescriptorId::CooccurrenceTexture: return 96;
    case DescriptorId::GaborTexture: return 48;
    case DescriptorId::FourierEdge: return 512;
    case DescriptorId::Sift: return 128;
    case DescriptorId::SiftGabor: return 176;
    case DescriptorId::WaveletEnergy: return 10;
    case DescriptorId::HoughHist: return 36;
    case DescriptorId::MotionActivity: return 10;
  }
  return 0;
}

/// Descriptors whose values form an L1-normalized histogram.
inline constexpr bool is_histogram(DescriptorId id) {
  return id == DescriptorId::ColorHistHSV || id == DescriptorId::FourierEdge ||
         id == DescriptorId::WaveletEnergy || id == DescriptorId::HoughHist ||
         id == DescriptorId::MotionActivity;
}

inline constexpr std::string_view name(DescriptorId id) {
  switch (id) {
    case DescriptorId::ColorHistHSV: return "ColorHistHSV";
    case DescriptorId::ColorMomentsLab: return "ColorMomentsLab";
    case DescriptorId::CooccurrenceTexture: return "CooccurrenceTexture";
    case DescriptorId::GaborTexture: return "GaborTexture";
    case DescriptorId::FourierEdge: return "FourierEdge";
    case DescriptorId::Sift: return "Sift";
    case DescriptorId::SiftGabor: return "SiftGabor";
    case DescriptorId::WaveletEnergy: return "WaveletEnergy";
    case DescriptorId::HoughHist: return "HoughHist";
    case DescriptorId::MotionActivity: return "MotionActivity";
  }
  return "?";
}

inline DescriptorId parse_descriptor(std::string_view s) {
  for (auto id : kAllDescriptors)
    if (name(id) == s) return id;
  throw DataError("unknown descriptor '" + std::string(s) + "'");
}

enum class RegionClass { Inside, Outside, KeyFrame };

inline constexpr std::array kAllRegions{RegionClass::Inside, RegionClass::Outside,
                                        RegionClass::KeyFrame};

inline constexpr std::string_view name(RegionClass r) {
  switch (r) {
    case RegionClass::Inside: return "Inside";
    case RegionClass::Outside: return "Outside";
    case RegionClass::KeyFrame: return "KeyFrame";
  }
  return "?";
}

inline RegionClass parse_region(std::string_view s) {
  for (auto r : kAllRegions)
    if (name(r) == s) return r;
  throw DataError("unknown region class '" + std::string(s) + "'");
}

struct FeatureVector {
  DescriptorId id = DescriptorId::ColorHistHSV;
  RegionClass region = RegionClass::KeyFrame;
  std::vector<double> values;

  bool operator==(const FeatureVector&) const = default;
};

/// Checks the length and finiteness contract; throws NumericalError.
inline void validate(const FeatureVector& v) {
  if (static_cast<int>(v.values.size()) != dimension(v.id))
    throw NumericalError(std::string(name(v.id)) + ": expected " + std::to_string(dimension(v.id)) +
                         " values, got " + std::to_string(v.values.size()));
  for (double x : v.values)
    if (!std::isfinite(x)) throw NumericalError(std::string(name(v.id)) + ": non-finite value");
}

namespace detail {

// Below this norm a vector is treated as all-zero and left unnormalized.
inline constexpr double kZeroNorm = 1e-12;

inline void l1_normalize(std::vector<double>& v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > kZeroNorm)
    for (double& x : v) x /= s;
  else
    std::fill(v.begin(), v.end(), 0.0);
}

inline void l2_normalize(std::vector<double>& v) {
  const double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (n > kZeroNorm)
    for (double& x : v) x /= n;
  else
    std::fill(v.begin(), v.end(), 0.0);
}

}  // namespace detail
}  // namespace mavsir
