#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mavsir/error.hpp"

namespace mavsir {

// Row-major 2D grid. Frame, level-set and flow planes are all grids of double.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(check_dims(width, height)), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Clamped (edge-replicated) access.
  const T& at_clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::size_t index(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& o) const {
    return width_ == o.width() && height_ == o.height();
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Grid&) const = default;

 private:
  static long check_dims(int w, int h) {
    detail::require<DataError>(w >= 1 && h >= 1, "grid dimensions must be >= 1");
    return static_cast<long>(w) * static_cast<long>(h);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Single-channel intensity plane. Ingested intensities live in [0,1];
/// derived planes (speed, level set) reuse the type without that bound.
using Frame = Grid<double>;

/// RGB frame as three planes of intensities in [0,1].
struct ColorFrame {
  std::array<Frame, 3> planes;

  ColorFrame() = default;
  ColorFrame(int width, int height, double fill = 0.0)
      : planes{Frame(width, height, fill), Frame(width, height, fill),
               Frame(width, height, fill)} {}

  int width() const { return planes[0].width(); }
  int height() const { return planes[0].height(); }
  Frame& r() { return planes[0]; }
  Frame& g() { return planes[1]; }
  Frame& b() { return planes[2]; }
  const Frame& r() const { return planes[0]; }
  const Frame& g() const { return planes[1]; }
  const Frame& b() const { return planes[2]; }

  bool operator==(const ColorFrame&) const = default;
};

/// Binary mask, 1 = selected.
using Mask = Grid<unsigned char>;

struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int area() const { return w * h; }
  bool operator==(const BBox&) const = default;
};

inline double bbox_iou(const BBox& a, const BBox& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w);
  const int y1 = std::min(a.y + a.h, b.y + b.h);
  const int inter = std::max(0, x1 - x0) * std::max(0, y1 - y0);
  const int uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

inline double mask_iou(const Mask& a, const Mask& b) {
  detail::require(a.same_shape(b), "mask_iou: shape mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool pa = a[i] != 0, pb = b[i] != 0;
    inter += (pa && pb);
    uni += (pa || pb);
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

inline std::size_t mask_count(const Mask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.values().begin(), m.values().end(), [](auto v) { return v != 0; }));
}

inline Mask complement(const Mask& m) {
  Mask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
  return out;
}

template <typename T>
Grid<T> crop(const Grid<T>& f, const BBox& b) {
  detail::require(b.w >= 1 && b.h >= 1 && b.x >= 0 && b.y >= 0 &&
                      b.x + b.w <= f.width() && b.y + b.h <= f.height(),
                  "crop: box outside frame");
  Grid<T> out(b.w, b.h);
  for (int y = 0; y < b.h; ++y)
    for (int x = 0; x < b.w; ++x) out(x, y) = f(b.x + x, b.y + y);
  return out;
}

inline ColorFrame crop(const ColorFrame& c, const BBox& b) {
  ColorFrame out;
  for (int k = 0; k < 3; ++k) out.planes[k] = crop(c.planes[k], b);
  return out;
}

// Grows `b` symmetrically to at least min_w x min_h, shifted to stay inside
// a width x height frame (never larger than the frame itself).
inline BBox grow_to(const BBox& b, int min_w, int min_h, int width, int height) {
  BBox out = b;
  auto grow = [](int& pos, int& len, int target, int limit) {
    target = std::min(target, limit);
    if (len >= target) return;
    const int extra = target - len;
    pos -= extra / 2;
    len = target;
    pos = std::clamp(pos, 0, limit - len);
  };
  grow(out.x, out.w, min_w, width);
  grow(out.y, out.h, min_h, height);
  return out;
}

}  // namespace mavsir
