#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

// Little-endian fixed-width primitives shared by all binary formats.
// Fields are assembled byte by byte so files come out identical on any
// host.

namespace wta::io {

inline void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
  write_u32(os, static_cast<uint32_t>(v & 0xffffffffull));
  write_u32(os, static_cast<uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& os, float v) {
  write_u32(os, std::bit_cast<uint32_t>(v));
}

inline uint32_t read_u32(std::istream& is, const std::string& what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error(what + ": truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline uint64_t read_u64(std::istream& is, const std::string& what) {
  uint64_t lo = read_u32(is, what);
  uint64_t hi = read_u32(is, what);
  return lo | (hi << 32);
}

inline float read_f32(std::istream& is, const std::string& what) {
  return std::bit_cast<float>(read_u32(is, what));
}

inline void write_magic(std::ostream& os, const char tag[4]) { os.write(tag, 4); }

inline void expect_magic(std::istream& is, const char tag[4], const std::string& what) {
  char b[4];
  is.read(b, 4);
  if (!is) throw std::runtime_error(what + ": truncated file");
  if (b[0] != tag[0] || b[1] != tag[1] || b[2] != tag[2] || b[3] != tag[3])
    throw std::runtime_error(what + ": bad magic, expected \"" + std::string(tag, 4) + "\"");
}

inline void expect_version(std::istream& is, uint32_t version, const std::string& what) {
  uint32_t v = read_u32(is, what);
  if (v != version)
    throw std::runtime_error(what + ": unsupported version " + std::to_string(v) +
                             ", expected " + std::to_string(version));
}

}  // namespace wta::io
