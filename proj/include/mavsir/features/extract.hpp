#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mavsir/features/color.hpp"
#include "mavsir/features/descriptor.hpp"
#include "mavsir/features/fourier.hpp"
#include "mavsir/features/gabor.hpp"
#include "mavsir/features/glcm.hpp"
#include "mavsir/features/hough.hpp"
#include "mavsir/features/sift.hpp"
#include "mavsir/features/wavelet.hpp"
#include "mavsir/image.hpp"
#include "mavsir/optflow.hpp"
#include "mavsir/segment.hpp"

namespace mavsir {

/// Which descriptors are computed for a region class.
inline bool applicable(DescriptorId id, RegionClass r) {
  if (r != RegionClass::Outside) return true;
  return id != DescriptorId::Sift && id != DescriptorId::SiftGabor && id != DescriptorId::MotionActivity;
}

inline std::vector<DescriptorId> applicable_descriptors(RegionClass r) {
  std::vector<DescriptorId> out;
  for (auto id : kAllDescriptors)
    if (applicable(id, r)) out.push_back(id);
  return out;
}

struct ExtractOptions {
  // When set, Outside descriptors are computed on this static-background
  // image instead of the key-frame with the moving region filled in.
  const ColorFrame* background = nullptr;
};

namespace detail {

inline BBox mask_bbox(const Mask& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  return x1 < 0 ? BBox{} : BBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

inline FlowField crop(const FlowField& f, const BBox& b) {
  FlowField out;
  out.u = mavsir::crop(f.u, b);
  out.v = mavsir::crop(f.v, b);
  return out;
}

/// Pixels outside `keep` replaced by the mean of the kept ones, per channel.
inline ColorFrame fill_outside(const ColorFrame& c, const Mask& keep) {
  ColorFrame out = c;
  const std::size_t n = mask_count(keep);
  for (auto& plane : out.planes) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane.size(); ++i)
      if (keep[i]) s += plane[i];
    const double mean = n ? s / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < plane.size(); ++i)
      if (!keep[i]) plane[i] = mean;
  }
  return out;
}

inline FeatureVector tagged(FeatureVector v, RegionClass r) {
  v.region = r;
  validate(v);
  return v;
}

}  // namespace detail

// Smallest crop the descriptors accept (Fourier edge needs 32x32).
inline constexpr int kMinRegionSide = kFourierMinSide;

/// Every applicable (descriptor, region) vector for one key-frame. An empty
/// moving region yields no Inside vectors at all.
inline std::vector<FeatureVector> extract_all(const ColorFrame& key, const SegmentationResult& seg,
                                              const FlowField& flow, const ExtractOptions& opt = {}) {
  const int w = key.width(), h = key.height();
  detail::require(seg.mask.width() == w && seg.mask.height() == h && flow.width() == w && flow.height() == h,
                  "extract_all: key-frame, mask and flow shapes differ");
  detail::require(w >= kMinRegionSide && h >= kMinRegionSide, "extract_all: frame smaller than 32x32");
  const Frame gray = to_grayscale(key);
  std::vector<FeatureVector> out;

  using enum DescriptorId;
  auto whole = [&](const ColorFrame& c, const Frame& g, const FlowField* fl, RegionClass r, const Mask* m) {
    for (auto id : applicable_descriptors(r)) {
      switch (id) {
        case ColorHistHSV: out.push_back(detail::tagged(color_hist_hsv(c, m), r)); break;
        case ColorMomentsLab: out.push_back(detail::tagged(color_moments_lab(c, m), r)); break;
        case CooccurrenceTexture: out.push_back(detail::tagged(glcm_stats(g, m), r)); break;
        case GaborTexture: out.push_back(detail::tagged(gabor_bank(g), r)); break;
        case FourierEdge: out.push_back(detail::tagged(fourier_edge(g), r)); break;
        case Sift: out.push_back(detail::tagged(sift_region(g, {0, 0, g.width(), g.height()}), r)); break;
        case SiftGabor: out.push_back(detail::tagged(sift_gabor(g, {0, 0, g.width(), g.height()}), r)); break;
        case WaveletEnergy: out.push_back(detail::tagged(wavelet_energy(g), r)); break;
        case HoughHist: out.push_back(detail::tagged(hough_hist(g), r)); break;
        case MotionActivity: out.push_back(detail::tagged(motion_activity(*fl), r)); break;
      }
    }
  };

  whole(key, gray, &flow, RegionClass::KeyFrame, nullptr);

  const std::size_t inside = mask_count(seg.mask);
  if (inside > 0) {
    // Histogram and co-occurrence statistics use the mask; the rest use the
    // region's box grown to the minimum crop.
    const BBox box = grow_to(detail::mask_bbox(seg.mask), kMinRegionSide, kMinRegionSide, w, h);
    const ColorFrame ck = crop(key, box);
    const Frame cg = crop(gray, box);
    const FlowField cf = detail::crop(flow, box);
    const Mask cm = crop(seg.mask, box);
    whole(ck, cg, &cf, RegionClass::Inside, &cm);
  }

  if (inside < seg.mask.size()) {
    const Mask keep = complement(seg.mask);
    if (opt.background) {
      whole(*opt.background, to_grayscale(*opt.background), nullptr, RegionClass::Outside, nullptr);
    } else {
      const ColorFrame filled = detail::fill_outside(key, keep);
      whole(filled, to_grayscale(filled), nullptr, RegionClass::Outside, &keep);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature dump: one record per line,
//   descriptor <TAB> region <TAB> frame <TAB> v0 <TAB> v1 ...
// ---------------------------------------------------------------------------

struct FeatureRecord {
  int frame = 0;
  FeatureVector vec;

  bool operator==(const FeatureRecord&) const = default;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Exact inverse of format_double, subnormals included (std::stod rejects
/// those as out of range). Throws DataError unless all of `s` is a number.
inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw DataError("bad number '" + std::string(s) + "'");
  return v;
}

inline void write_feature_dump(std::ostream& out, const std::vector<FeatureRecord>& recs) {
  for (const auto& r : recs) {
    out << name(r.vec.id) << '\t' << name(r.vec.region) << '\t' << r.frame;
    for (double v : r.vec.values) out << '\t' << format_double(v);
    out << '\n';
  }
}

inline std::vector<FeatureRecord> read_feature_dump(std::istream& in) {
  std::vector<FeatureRecord> recs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, region, field;
    FeatureRecord r;
    if (!std::getline(ss, id, '\t') || !std::getline(ss, region, '\t') || !std::getline(ss, field, '\t'))
      throw DataError("feature dump line " + std::to_string(lineno) + ": missing columns");
    r.vec.id = parse_descriptor(id);
    r.vec.region = parse_region(region);
    try {
      r.frame = std::stoi(field);
      while (std::getline(ss, field, '\t')) r.vec.values.push_back(parse_double(field));
    } catch (const std::exception&) {
      throw DataError("feature dump line " + std::to_string(lineno) + ": bad number");
    }
    if (static_cast<int>(r.vec.values.size()) != dimension(r.vec.id))
      throw DataError("feature dump line " + std::to_string(lineno) + ": wrong dimensionality");
    recs.push_back(std::move(r));
  }
  return recs;
}

}  // namespace mavsir
