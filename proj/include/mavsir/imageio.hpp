#pragma once

// Netpbm (P5/P6, 8-bit) and YUV4MPEG2 (4:2:0, 8-bit) reading and writing.
// Samples are mapped to [0,1] on ingestion (v / 255).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mavsir/error.hpp"
#include "mavsir/image.hpp"

namespace mavsir::io {

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace detail {

inline std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

inline int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(std::string("malformed ") + what + ": '" + s + "'");
  }
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
};

inline PnmHeader read_pnm_header(std::istream& in) {
  PnmHeader h;
  h.magic = next_token(in);
  if (h.magic != "P5" && h.magic != "P6") throw DataError("unsupported netpbm magic '" + h.magic + "'");
  h.width = parse_int(next_token(in), "width");
  h.height = parse_int(next_token(in), "height");
  const int maxval = parse_int(next_token(in), "maxval");
  if (h.width < 1 || h.height < 1) throw DataError("netpbm: bad dimensions");
  if (maxval != 255) throw DataError("netpbm: only 8-bit (maxval 255) supported");
  return h;
}

inline std::vector<std::uint8_t> read_bytes(std::istream& in, std::size_t n, const char* what) {
  std::vector<std::uint8_t> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw DataError(std::string(what) + ": truncated data");
  return buf;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Netpbm
// ---------------------------------------------------------------------------

/// Reads P5 directly, or P6 converted to grayscale by luma weights.
inline Frame read_pgm(std::istream& in);
inline ColorFrame read_ppm(std::istream& in);

inline ColorFrame read_ppm(std::istream& in) {
  const auto h = detail::read_pnm_header(in);
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  ColorFrame c(h.width, h.height);
  if (h.magic == "P5") {
    const auto buf = detail::read_bytes(in, n, "pgm");
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k) c.planes[k][i] = buf[i] / 255.0;
    return c;
  }
  const auto buf = detail::read_bytes(in, 3 * n, "ppm");
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) c.planes[k][i] = buf[3 * i + k] / 255.0;
  return c;
}

inline Frame read_pgm(std::istream& in) {
  const auto h = detail::read_pnm_header(in);
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  Frame f(h.width, h.height);
  if (h.magic == "P5") {
    const auto buf = detail::read_bytes(in, n, "pgm");
    for (std::size_t i = 0; i < n; ++i) f[i] = buf[i] / 255.0;
    return f;
  }
  const auto buf = detail::read_bytes(in, 3 * n, "ppm");
  for (std::size_t i = 0; i < n; ++i) {
    const double v = 0.299 * buf[3 * i] + 0.587 * buf[3 * i + 1] + 0.114 * buf[3 * i + 2];
    f[i] = std::clamp(v / 255.0, 0.0, 1.0);
  }
  return f;
}

inline void write_pgm(std::ostream& out, const Frame& f) {
  out << "P5\n" << f.width() << ' ' << f.height() << "\n255\n";
  std::vector<std::uint8_t> buf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) buf[i] = to_byte(f[i]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline void write_pgm(std::ostream& out, const Mask& m) {
  out << "P5\n" << m.width() << ' ' << m.height() << "\n255\n";
  std::vector<std::uint8_t> buf(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) buf[i] = m[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline void write_ppm(std::ostream& out, const ColorFrame& c) {
  out << "P6\n" << c.width() << ' ' << c.height() << "\n255\n";
  const std::size_t n = c.r().size();
  std::vector<std::uint8_t> buf(3 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) buf[3 * i + k] = to_byte(c.planes[k][i]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline Frame read_pgm_file(const std::string& path) {
  auto in = detail::open_in(path);
  return read_pgm(in);
}

inline ColorFrame read_ppm_file(const std::string& path) {
  auto in = detail::open_in(path);
  return read_ppm(in);
}

template <typename Image>
void write_pgm_file(const std::string& path, const Image& img) {
  auto out = detail::open_out(path);
  write_pgm(out, img);
}

inline void write_ppm_file(const std::string& path, const ColorFrame& c) {
  auto out = detail::open_out(path);
  write_ppm(out, c);
}

// ---------------------------------------------------------------------------
// YUV4MPEG2, 4:2:0, full-range (JFIF) BT.601 matrix
// ---------------------------------------------------------------------------

struct Y4mInfo {
  int width = 0;
  int height = 0;
  int fps_num = 25;
  int fps_den = 1;

  double fps() const { return static_cast<double>(fps_num) / fps_den; }
};

inline void yuv_to_rgb(double y, double cb, double cr, double& r, double& g, double& b) {
  r = y + 1.402 * (cr - 128.0);
  g = y - 0.344136 * (cb - 128.0) - 0.714136 * (cr - 128.0);
  b = y + 1.772 * (cb - 128.0);
  r = std::clamp(r / 255.0, 0.0, 1.0);
  g = std::clamp(g / 255.0, 0.0, 1.0);
  b = std::clamp(b / 255.0, 0.0, 1.0);
}

class Y4mReader {
 public:
  explicit Y4mReader(const std::string& path) : in_(detail::open_in(path)) { parse_header(); }

  const Y4mInfo& info() const { return info_; }

  /// Next frame as RGB; false at end of stream.
  bool next(ColorFrame& out) {
    std::string line;
    if (!std::getline(in_, line)) return false;
    if (line.rfind("FRAME", 0) != 0) throw DataError("y4m: expected FRAME marker");
    const int w = info_.width, h = info_.height;
    const int cw = (w + 1) / 2, ch = (h + 1) / 2;
    const auto yp = detail::read_bytes(in_, static_cast<std::size_t>(w) * h, "y4m");
    const auto up = detail::read_bytes(in_, static_cast<std::size_t>(cw) * ch, "y4m");
    const auto vp = detail::read_bytes(in_, static_cast<std::size_t>(cw) * ch, "y4m");
    out = ColorFrame(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t ci = static_cast<std::size_t>(y / 2) * cw + x / 2;
        double r, g, b;
        yuv_to_rgb(yp[static_cast<std::size_t>(y) * w + x], up[ci], vp[ci], r, g, b);
        out.r()(x, y) = r;
        out.g()(x, y) = g;
        out.b()(x, y) = b;
      }
    }
    return true;
  }

  std::vector<ColorFrame> read_all() {
    std::vector<ColorFrame> frames;
    ColorFrame f;
    while (next(f)) frames.push_back(f);
    return frames;
  }

 private:
  void parse_header() {
    std::string line;
    if (!std::getline(in_, line) || line.rfind("YUV4MPEG2", 0) != 0)
      throw DataError("y4m: missing YUV4MPEG2 signature");
    std::istringstream ss(line.substr(9));
    std::string tok;
    while (ss >> tok) {
      switch (tok[0]) {
        case 'W': info_.width = detail::parse_int(tok.substr(1), "y4m width"); break;
        case 'H': info_.height = detail::parse_int(tok.substr(1), "y4m height"); break;
        case 'F': {
          const auto colon = tok.find(':');
          if (colon == std::string::npos) throw DataError("y4m: malformed frame rate");
          info_.fps_num = detail::parse_int(tok.substr(1, colon - 1), "y4m fps");
          info_.fps_den = detail::parse_int(tok.substr(colon + 1), "y4m fps");
          break;
        }
        case 'C':
          if (tok.rfind("C420", 0) != 0) throw DataError("y4m: only 4:2:0 chroma supported, got " + tok);
          if (const auto q = tok.find('p', 4); q != std::string::npos && q + 1 < tok.size() &&
              std::isdigit(static_cast<unsigned char>(tok[q + 1])))
            throw DataError("y4m: only 8-bit samples supported");
          break;
        default: break;
      }
    }
    if (info_.width < 1 || info_.height < 1) throw DataError("y4m: missing dimensions");
    if (info_.fps_num <= 0 || info_.fps_den <= 0) throw DataError("y4m: bad frame rate");
  }

  std::ifstream in_;
  Y4mInfo info_;
};

class Y4mWriter {
 public:
  Y4mWriter(const std::string& path, int width, int height, int fps_num = 25, int fps_den = 1)
      : out_(detail::open_out(path)), width_(width), height_(height) {
    out_ << "YUV4MPEG2 W" << width << " H" << height << " F" << fps_num << ':' << fps_den
         << " Ip A1:1 C420jpeg\n";
  }

  void write(const ColorFrame& c) {
    mavsir::detail::require(c.width() == width_ && c.height() == height_, "y4m: frame size mismatch");
    const int w = width_, h = height_;
    const int cw = (w + 1) / 2, ch = (h + 1) / 2;
    std::vector<std::uint8_t> yp(static_cast<std::size_t>(w) * h);
    std::vector<double> cb(static_cast<std::size_t>(cw) * ch, 0.0), cr(cb.size(), 0.0), cnt(cb.size(), 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double r = 255.0 * c.r()(x, y), g = 255.0 * c.g()(x, y), b = 255.0 * c.b()(x, y);
        const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
        yp[static_cast<std::size_t>(y) * w + x] =
            static_cast<std::uint8_t>(std::lround(std::clamp(luma, 0.0, 255.0)));
        const std::size_t ci = static_cast<std::size_t>(y / 2) * cw + x / 2;
        cb[ci] += 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
        cr[ci] += 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
        cnt[ci] += 1.0;
      }
    }
    std::vector<std::uint8_t> up(cb.size()), vp(cb.size());
    for (std::size_t i = 0; i < cb.size(); ++i) {
      up[i] = static_cast<std::uint8_t>(std::lround(std::clamp(cb[i] / cnt[i], 0.0, 255.0)));
      vp[i] = static_cast<std::uint8_t>(std::lround(std::clamp(cr[i] / cnt[i], 0.0, 255.0)));
    }
    out_ << "FRAME\n";
    out_.write(reinterpret_cast<const char*>(yp.data()), static_cast<std::streamsize>(yp.size()));
    out_.write(reinterpret_cast<const char*>(up.data()), static_cast<std::streamsize>(up.size()));
    out_.write(reinterpret_cast<const char*>(vp.data()), static_cast<std::streamsize>(vp.size()));
    if (!out_) throw DataError("y4m: write failed");
  }

 private:
  std::ofstream out_;
  int width_;
  int height_;
};

}  // namespace mavsir::io
