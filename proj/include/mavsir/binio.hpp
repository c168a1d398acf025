#pragma once

// Little-endian scalar encoding shared by the binary file formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mavsir/error.hpp"

namespace mavsir {

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw DataError("unexpected end of binary stream");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

inline void put_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

inline double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

inline void put_magic(std::ostream& out, const char* magic, std::size_t n) { out.write(magic, static_cast<std::streamsize>(n)); }

inline void expect_magic(std::istream& in, const char* magic, std::size_t n) {
  std::string got(n, '\0');
  in.read(got.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n || got != std::string(magic, n))
    throw DataError("bad file magic, expected '" + std::string(magic, n) + "'");
}

}  // namespace detail

}  // namespace mavsir
