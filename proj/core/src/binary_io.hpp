#pragma once

// Little-endian primitives shared by the binary file formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "tahg/error.hpp"

namespace tahg::io {

inline void write_u64(std::ostream& out, std::uint64_t x) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

inline void write_u32(std::ostream& out, std::uint32_t x) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(b.data(), 4);
}

inline void write_i32(std::ostream& out, std::int32_t x) { write_u32(out, static_cast<std::uint32_t>(x)); }
inline void write_f64(std::ostream& out, double x) { write_u64(out, std::bit_cast<std::uint64_t>(x)); }
inline void write_f32(std::ostream& out, float x) { write_u32(out, std::bit_cast<std::uint32_t>(x)); }

inline void write_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), 8); }

inline void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) fail(ErrorCode::BadFormat, "unexpected end of file");
}

inline std::uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  read_exact(in, reinterpret_cast<char*>(b.data()), 8);
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}

inline std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  read_exact(in, reinterpret_cast<char*>(b.data()), 4);
  std::uint32_t x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}

inline std::int32_t read_i32(std::istream& in) { return static_cast<std::int32_t>(read_u32(in)); }
inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }
inline float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

inline std::string read_string(std::istream& in, std::uint64_t max_len = (1ULL << 32)) {
  const auto n = read_u64(in);
  if (n > max_len) fail(ErrorCode::BadFormat, "string length out of range");
  std::string s(n, '\0');
  if (n) read_exact(in, s.data(), n);
  return s;
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 8> b{};
  in.read(b.data(), 8);
  if (in.gcount() != 8 || std::string_view(b.data(), 8) != magic) {
    fail(ErrorCode::BadFormat, "missing magic '" + std::string(magic) + "'");
  }
}

}  // namespace tahg::io
