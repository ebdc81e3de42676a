// Internal helpers for the little-endian binary file formats. Not installed;
// shared by the readers/writers in this directory only.
#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "scanleak/errors.hpp"

namespace scanleak::binio {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw FileError(FileError::Kind::io, "write failed");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  write_bytes(os, &v, sizeof v);
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  if (!s.empty()) write_bytes(os, s.data(), s.size());
}

inline void read_bytes(std::istream& is, void* p, std::size_t n,
                       const std::string& what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw FileError(FileError::Kind::truncated, "file ends inside " + what);
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
  T v{};
  read_bytes(is, &v, sizeof v, what);
  return v;
}

inline std::string read_string(std::istream& is, const std::string& what) {
  const auto n = read_pod<std::uint32_t>(is, what + " length");
  std::string s(n, '\0');
  if (n) read_bytes(is, s.data(), n, what);
  return s;
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError(FileError::Kind::io, "cannot open " + path);
  return is;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FileError(FileError::Kind::io, "cannot create " + path);
  return os;
}

inline void check_magic(std::istream& is, const char expect[4],
                        const std::string& path) {
  char magic[4];
  read_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, expect, 4) != 0)
    throw FileError(FileError::Kind::bad_magic,
                    path + ": not a " + std::string(expect, 4) + " file");
}

}  // namespace scanleak::binio
