#include "scanleak/trace_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"

namespace scanleak {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need swaps");

// ---- trace metadata helpers -------------------------------------------------

void EmTrace::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw DomainError("trace: sample rate must be positive and finite");
}

static std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw DomainError("format_double: value not representable");
  return std::string(buf, ptr);
}

void EmTrace::meta_set_double(const std::string& key, double value) {
  meta[key] = format_double(value);
}

const std::string& EmTrace::meta_get(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DomainError("trace meta: missing key '" + key + "'");
  return it->second;
}

double EmTrace::meta_get_double(const std::string& key) const {
  const std::string& text = meta_get(key);
  // std::from_chars for doubles is incomplete in some standard libraries;
  // strtod handles the full grammar and we check it consumed everything.
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty())
    throw DomainError("trace meta: '" + key + "' is not a number: " + text);
  return v;
}

const char* session_kind_name(SessionKind k) {
  switch (k) {
    case SessionKind::screen_unlock: return "screen_unlock";
    case SessionKind::keyboard_input: return "keyboard_input";
    case SessionKind::app_operation: return "app_operation";
    case SessionKind::handwriting: return "handwriting";
  }
  throw DomainError("session_kind_name: bad enum value");
}

SessionKind session_kind_from_name(const std::string& name) {
  if (name == "screen_unlock") return SessionKind::screen_unlock;
  if (name == "keyboard_input") return SessionKind::keyboard_input;
  if (name == "app_operation") return SessionKind::app_operation;
  if (name == "handwriting") return SessionKind::handwriting;
  throw DomainError("unknown session kind: " + name);
}

using namespace binio;

// ---- trace files ------------------------------------------------------------

void save_trace(const EmTrace& trace, const std::string& path) {
  trace.validate();
  std::string meta_text;
  for (const auto& [k, v] : trace.meta) {  // map order = sorted keys
    meta_text += k;
    meta_text += '=';
    meta_text += v;
    meta_text += '\n';
  }
  auto os = open_for_write(path);
  write_bytes(os, "TESL", 4);
  write_pod<std::uint16_t>(os, kTraceFormatVersion);
  write_pod<double>(os, trace.sample_rate);
  write_pod<std::uint64_t>(os, trace.samples.size());
  write_string(os, trace.profile_name);
  write_string(os, meta_text);
  if (!trace.samples.empty())
    write_bytes(os, trace.samples.data(),
                trace.samples.size() * sizeof(float));
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

EmTrace load_trace(const std::string& path) {
  auto is = open_for_read(path);
  check_magic(is, "TESL", path);
  const auto version = read_pod<std::uint16_t>(is, "version");
  if (version != kTraceFormatVersion)
    throw FileError(FileError::Kind::version_mismatch,
                    path + ": trace format version " + std::to_string(version) +
                        ", expected " + std::to_string(kTraceFormatVersion));
  EmTrace trace;
  trace.sample_rate = read_pod<double>(is, "sample rate");
  const auto count = read_pod<std::uint64_t>(is, "sample count");
  trace.profile_name = read_string(is, "profile name");
  const std::string meta_text = read_string(is, "meta block");

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < meta_text.size()) {
    ++line_no;
    std::size_t nl = meta_text.find('\n', pos);
    if (nl == std::string::npos) nl = meta_text.size();
    const std::string line = meta_text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw FileError(FileError::Kind::parse,
                      path + ": meta line " + std::to_string(line_no) +
                          " has no '='");
    trace.meta.emplace(line.substr(0, eq), line.substr(eq + 1));
  }

  trace.samples.resize(count);
  if (count)
    read_bytes(is, trace.samples.data(), count * sizeof(float), "samples");
  trace.validate();
  return trace;
}

// ---- matrix files -----------------------------------------------------------

void save_matrix(const Matrix& m, const std::string& path) {
  if (m.values.size() != std::size_t(m.rows) * m.cols)
    throw DomainError("save_matrix: values size does not match rows*cols");
  auto os = open_for_write(path);
  write_bytes(os, "TMAT", 4);
  write_pod<std::uint32_t>(os, m.rows);
  write_pod<std::uint32_t>(os, m.cols);
  write_pod<std::uint32_t>(os, 0u);  // reserved; keeps the header 16 bytes
  if (!m.values.empty())
    write_bytes(os, m.values.data(), m.values.size() * sizeof(float));
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

Matrix load_matrix(const std::string& path) {
  auto is = open_for_read(path);
  check_magic(is, "TMAT", path);
  Matrix m;
  m.rows = read_pod<std::uint32_t>(is, "row count");
  m.cols = read_pod<std::uint32_t>(is, "column count");
  (void)read_pod<std::uint32_t>(is, "reserved word");
  const std::size_t n = std::size_t(m.rows) * m.cols;
  m.values.resize(n);
  if (n) read_bytes(is, m.values.data(), n * sizeof(float), "matrix values");
  return m;
}

// ---- manifests --------------------------------------------------------------

void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::string& path) {
  auto os = open_for_write(path);
  for (const auto& e : entries) {
    nlohmann::json j;
    j["path"] = e.path;
    j["label"] = e.label;
    j["session_kind"] = e.session_kind;
    j["seed"] = e.seed;
    j["distance"] = e.distance;
    os << j.dump() << '\n';
  }
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  auto is = open_for_read(path);
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw FileError(FileError::Kind::parse,
                      path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    try {
      ManifestEntry e;
      e.path = j.at("path").get<std::string>();
      e.label = j.at("label").get<std::string>();
      e.session_kind = j.at("session_kind").get<std::string>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.distance = j.at("distance").get<double>();
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw FileError(FileError::Kind::parse,
                      path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return entries;
}

}  // namespace scanleak
