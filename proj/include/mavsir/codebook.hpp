#pragma once

// Vector quantization of descriptors into labels, and fixed-length shot
// signatures built from label histograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mavsir/binio.hpp"
#include "mavsir/error.hpp"
#include "mavsir/features/descriptor.hpp"
#include "mavsir/synth.hpp"

namespace mavsir {

using Channel = std::pair<DescriptorId, RegionClass>;

inline std::string channel_name(const Channel& c) {
  return std::string(name(c.first)) + "." + std::string(name(c.second));
}

struct Codebook {
  DescriptorId id = DescriptorId::ColorHistHSV;
  RegionClass region = RegionClass::KeyFrame;
  std::vector<std::vector<double>> centroids;
  // Training metadata; not persisted.
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // after every assignment step

  Channel channel() const { return {id, region}; }
  int k() const { return static_cast<int>(centroids.size()); }
  int dim() const { return centroids.empty() ? 0 : static_cast<int>(centroids[0].size()); }
};

struct KMeansParams {
  int k = 64;
  std::uint64_t seed = 1;
  int max_iters = 100;
  double rel_tol = 1e-4;

  void validate() const {
    detail::require<ConfigError>(k >= 2, "codebook k must be >= 2");
    detail::require<ConfigError>(max_iters >= 1, "codebook max_iters must be >= 1");
    detail::require<ConfigError>(rel_tol >= 0.0, "codebook rel_tol must be >= 0");
  }
};

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Nearest centroid; ties go to the lowest index.
inline int nearest_centroid(const std::vector<std::vector<double>>& centroids, const std::vector<double>& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], x);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

namespace detail {

inline std::vector<std::vector<double>> kmeanspp_seed(const std::vector<const std::vector<double>*>& xs,
                                                      int k, Rng& rng) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c;
  std::vector<bool> taken(n, false);
  const int first = rng.uniform_int(0, n - 1);
  c.push_back(*xs[first]);
  taken[first] = true;
  std::vector<double> d2(n);
  for (int i = 0; i < n; ++i) d2[i] = squared_distance(*xs[i], c[0]);
  while (static_cast<int>(c.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    int pick = -1;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (int i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    } else {
      // Fewer distinct points than k: take the next unused one.
      for (int i = 0; i < n && pick < 0; ++i)
        if (!taken[i]) pick = i;
    }
    taken[pick] = true;
    c.push_back(*xs[pick]);
    for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(*xs[i], c.back()));
  }
  return c;
}

}  // namespace detail

/// k-means (Lloyd) with k-means++ seeding. Deterministic given the seed.
inline Codebook train_codebook(const std::vector<FeatureVector>& vectors, const KMeansParams& p) {
  p.validate();
  if (static_cast<int>(vectors.size()) < p.k)
    throw DataError("train_codebook: " + std::to_string(vectors.size()) + " vectors for k = " +
                    std::to_string(p.k));
  const Channel ch{vectors[0].id, vectors[0].region};
  std::vector<const std::vector<double>*> xs;
  for (const auto& v : vectors) {
    if (v.id != ch.first || v.region != ch.second) throw DataError("train_codebook: mixed channels");
    if (static_cast<int>(v.values.size()) != dimension(v.id))
      throw DataError("train_codebook: wrong dimensionality");
    xs.push_back(&v.values);
  }

  Codebook cb{ch.first, ch.second, {}, 0, p.seed, {}};
  Rng rng(p.seed);
  cb.centroids = detail::kmeanspp_seed(xs, p.k, rng);
  const std::size_t dim = xs[0]->size();
  std::vector<int> label(xs.size());
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < p.max_iters; ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      label[i] = nearest_centroid(cb.centroids, *xs[i]);
      inertia += squared_distance(cb.centroids[label[i]], *xs[i]);
    }
    cb.inertia_history.push_back(inertia);
    cb.iterations = it + 1;
    if (std::isfinite(prev) && (prev - inertia) <= p.rel_tol * prev) break;
    prev = inertia;
    // Update; an empty cluster keeps its centroid.
    std::vector<std::vector<double>> sum(p.k, std::vector<double>(dim, 0.0));
    std::vector<int> count(p.k, 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ++count[label[i]];
      for (std::size_t d = 0; d < dim; ++d) sum[label[i]][d] += (*xs[i])[d];
    }
    for (int c = 0; c < p.k; ++c)
      if (count[c] > 0)
        for (std::size_t d = 0; d < dim; ++d) cb.centroids[c][d] = sum[c][d] / count[c];
  }
  return cb;
}

inline double inertia(const Codebook& cb, const std::vector<FeatureVector>& vectors) {
  double s = 0.0;
  for (const auto& v : vectors) s += squared_distance(cb.centroids[nearest_centroid(cb.centroids, v.values)], v.values);
  return s;
}

inline std::vector<int> assign_labels(const Codebook& cb, const std::vector<FeatureVector>& vectors) {
  std::vector<int> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.id != cb.id || v.region != cb.region) throw DataError("assign_labels: channel mismatch");
    if (static_cast<int>(v.values.size()) != cb.dim()) throw DataError("assign_labels: dimensionality mismatch");
    out.push_back(nearest_centroid(cb.centroids, v.values));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shot signatures
// ---------------------------------------------------------------------------

struct LabelSequence {
  std::string shot_id;
  std::map<Channel, std::vector<int>> labels;  // one label per key-frame
};

struct ShotSignature {
  std::vector<double> values;
};

/// Per-channel label histograms in codebook order, each L1-normalized. A
/// channel the shot never produced (no moving region in any key-frame)
/// contributes an all-zero block.
inline ShotSignature shot_signature(const LabelSequence& seq, const std::vector<Codebook>& cbs) {
  bool any = false;
  for (const auto& [ch, ls] : seq.labels) any = any || !ls.empty();
  if (!any) throw DataError("shot_signature: empty shot '" + seq.shot_id + "'");
  ShotSignature sig;
  for (const auto& cb : cbs) {
    std::vector<double> block(cb.k(), 0.0);
    if (auto it = seq.labels.find(cb.channel()); it != seq.labels.end() && !it->second.empty()) {
      for (int l : it->second) {
        if (l < 0 || l >= cb.k()) throw DataError("shot_signature: label out of range");
        block[l] += 1.0;
      }
      for (double& b : block) b /= static_cast<double>(it->second.size());
    }
    sig.values.insert(sig.values.end(), block.begin(), block.end());
  }
  return sig;
}

// ---------------------------------------------------------------------------
// MAVCB01: magic, u32 descriptor, u32 region, u32 k, u32 dim, centroids as
// little-endian float64, centroid-major.
// ---------------------------------------------------------------------------

inline constexpr char kCodebookMagic[] = "MAVCB01";

inline void write_codebook(std::ostream& out, const Codebook& cb) {
  detail::put_magic(out, kCodebookMagic, 7);
  detail::put_u32(out, static_cast<std::uint32_t>(cb.id));
  detail::put_u32(out, static_cast<std::uint32_t>(cb.region));
  detail::put_u32(out, static_cast<std::uint32_t>(cb.k()));
  detail::put_u32(out, static_cast<std::uint32_t>(cb.dim()));
  for (const auto& c : cb.centroids)
    for (double v : c) detail::put_f64(out, v);
}

inline Codebook read_codebook(std::istream& in) {
  detail::expect_magic(in, kCodebookMagic, 7);
  const auto id = detail::get_u32(in), region = detail::get_u32(in);
  const auto k = detail::get_u32(in), dim = detail::get_u32(in);
  if (id >= kAllDescriptors.size() || region >= kAllRegions.size()) throw DataError("codebook: bad channel");
  Codebook cb;
  cb.id = static_cast<DescriptorId>(id);
  cb.region = static_cast<RegionClass>(region);
  if (k < 2 || static_cast<int>(dim) != dimension(cb.id)) throw DataError("codebook: bad k or dim");
  cb.centroids.assign(k, std::vector<double>(dim));
  for (auto& c : cb.centroids)
    for (double& v : c) v = detail::get_f64(in);
  return cb;
}

inline void write_codebook_file(const std::string& path, const Codebook& cb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_codebook(out, cb);
}

inline Codebook read_codebook_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_codebook(in);
}

}  // namespace mavsir
