#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "sssae/error.hpp"

// Little-endian binary primitives shared by the checkpoint and dataset-cache
// containers. On little-endian hosts arrays are written in bulk.
namespace sssae::io {

inline void write_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw IoError("unexpected end of file while reading u64");
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

inline void write_f64(std::ostream& out, double value) {
  write_u64(out, std::bit_cast<std::uint64_t>(value));
}

inline double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_u64(in));
}

inline void write_f64_array(std::ostream& out, const double* values, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values),
              static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) write_f64(out, values[i]);
  }
}

inline void read_f64_array(std::istream& in, double* values, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError("unexpected end of file while reading f64 array");
  } else {
    for (std::size_t i = 0; i < n; ++i) values[i] = read_f64(in);
  }
}

inline void write_magic(std::ostream& out, const char magic[4], std::uint8_t version) {
  out.write(magic, 4);
  out.put(static_cast<char>(version));
}

inline std::uint8_t read_magic(std::istream& in, const char magic[4],
                               const char* what) {
  char found[4];
  in.read(found, 4);
  if (!in || std::memcmp(found, magic, 4) != 0) {
    throw ParseError(std::string(what) + ": bad magic tag");
  }
  const int version = in.get();
  if (version < 0) throw IoError(std::string(what) + ": truncated header");
  return static_cast<std::uint8_t>(version);
}

}  // namespace sssae::io
