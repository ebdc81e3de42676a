#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scanleak/trace.hpp"

namespace scanleak {

// ---- trace files ("TESL") ---------------------------------------------------
// Little-endian binary: magic "TESL", u16 version, f64 sample_rate, u64
// sample_count, length-prefixed profile name, length-prefixed meta text
// (key=value lines, sorted), then sample_count f32 samples.
// Distinct failures: missing file (io), wrong magic (bad_magic), short data
// (truncated), unknown version (version_mismatch).

inline constexpr std::uint16_t kTraceFormatVersion = 1;

void save_trace(const EmTrace& trace, const std::string& path);
EmTrace load_trace(const std::string& path);

// ---- matrix files ("TMAT") --------------------------------------------------
// 16-byte header: magic "TMAT", u32 rows, u32 cols, u32 reserved (zero);
// then rows*cols little-endian f32, row-major.

struct Matrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> values;  // row-major

  float& at(std::uint32_t r, std::uint32_t c) { return values[std::size_t(r) * cols + c]; }
  float at(std::uint32_t r, std::uint32_t c) const { return values[std::size_t(r) * cols + c]; }
};

void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

// ---- dataset manifests (JSON lines) -----------------------------------------
// One JSON object per line: {"path", "label", "session_kind", "seed",
// "distance"}. Parse errors carry the line number.

struct ManifestEntry {
  std::string path;
  std::string label;
  std::string session_kind;
  std::uint64_t seed = 0;
  double distance = 0.0;
};

void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::string& path);
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace scanleak
