#include "scanleak/device_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace scanleak {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

// Shortest round-trip decimal form, locale-free.
std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string fmt_u64(std::uint64_t v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

void CouplingCircuit::validate() const {
  require(v_tx_amplitude > 0.0, "circuit: v_tx_amplitude must be > 0");
  require(r_tx > 0.0, "circuit: r_tx must be > 0");
  require(r_rx > 0.0, "circuit: r_rx must be > 0");
  require(c_0 > 0.0, "circuit: c_0 must be > 0");
  require(f_drive > 0.0, "circuit: f_drive must be > 0");
}

FingerState FingerState::absent() {
  FingerState f;
  f.distance = std::numeric_limits<double>::infinity();
  f.contact_area = 0.0;
  f.coupling_capacitance = 0.0;
  return f;
}

FingerState FingerState::at(double distance, double contact_area, double k_cap) {
  FingerState f;
  f.distance = distance;
  f.contact_area = contact_area;
  f.coupling_capacitance = finger_capacitance(distance, contact_area, k_cap);
  return f;
}

double finger_capacitance(double distance, double contact_area, double k_cap) {
  require(distance >= 0.0, "finger_capacitance: distance must be >= 0");
  require(contact_area >= 0.0, "finger_capacitance: contact_area must be >= 0");
  require(k_cap > 0.0, "finger_capacitance: k_cap must be > 0");
  if (contact_area == 0.0) return 0.0;
  if (std::isinf(distance)) return 0.0;
  return k_cap * contact_area / std::max(distance, kContactFloor);
}

void ScanTiming::validate() const {
  require(n_tx >= 1, "scan: n_tx must be >= 1");
  require(n_rx >= 1, "scan: n_rx must be >= 1");
  require(t_scan > 0.0, "scan: t_scan must be > 0");
  require(f_touch > 0.0, "scan: f_touch must be > 0");
  require(std::abs(f_touch * t_scan - 1.0) <= 1e-9,
          "scan: f_touch must equal 1/t_scan");
}

double scan_delay(int x, const ScanTiming& timing) {
  timing.validate();
  require(x >= 1 && x <= timing.n_tx, "scan_delay: column out of range");
  return static_cast<double>(x - 1) / static_cast<double>(timing.n_tx) *
             timing.t_scan +
         timing.delta_proc;
}

void DeviceProfile::validate() const {
  circuit.validate();
  scan.validate();
  require(screen_w > 0.0, "profile: screen_w must be > 0");
  require(screen_h > 0.0, "profile: screen_h must be > 0");
  require(rx_leak_gain >= 0.0 && rx_leak_gain <= 1.0,
          "profile: rx_leak_gain must be within [0, 1]");
}

std::complex<double> drive_voltage_untouched(const CouplingCircuit& c) {
  c.validate();
  const std::complex<double> j(0.0, 1.0);
  std::complex<double> z_c0 = 1.0 / (j * kTwoPi * c.f_drive * c.c_0);
  return c.v_tx_amplitude * c.r_tx / (c.r_tx + c.r_rx + z_c0);
}

std::complex<double> coupling_impedance(const FingerState& finger,
                                        const CouplingCircuit& c) {
  c.validate();
  require(finger.coupling_capacitance >= 0.0,
          "coupling_impedance: capacitance must be >= 0");
  const std::complex<double> j(0.0, 1.0);
  // With the finger in the path the crossing splits into two capacitors, so
  // the reactances below carry 4*pi*f (two 2*C_0 halves in series).
  std::complex<double> z_half = 1.0 / (j * 2.0 * kTwoPi * c.f_drive * c.c_0);
  std::complex<double> series = z_half + c.r_rx;
  if (finger.coupling_capacitance == 0.0) {
    return series;  // analytic limit, no double reciprocal
  }
  std::complex<double> y =
      j * kTwoPi * c.f_drive * finger.coupling_capacitance + 1.0 / series;
  return 1.0 / y;
}

std::complex<double> drive_voltage_touched(const CouplingCircuit& c,
                                           const FingerState& finger) {
  c.validate();
  const std::complex<double> j(0.0, 1.0);
  std::complex<double> z_half = 1.0 / (j * 2.0 * kTwoPi * c.f_drive * c.c_0);
  std::complex<double> dz = coupling_impedance(finger, c);
  return c.v_tx_amplitude * c.r_tx / (c.r_tx + z_half + dz);
}

// ---- profile files ----------------------------------------------------------

std::string profile_to_string(const DeviceProfile& p) {
  std::ostringstream out;
  out << "# scanleak device profile\n";
  out << "# Circuit constants and screen dimensions are representative\n";
  out << "# placeholder values, not measured device data.\n";
  out << "name = " << p.name << "\n";
  out << "screen_w = " << fmt_double(p.screen_w) << "\n";
  out << "screen_h = " << fmt_double(p.screen_h) << "\n";
  out << "n_tx = " << p.scan.n_tx << "\n";
  out << "n_rx = " << p.scan.n_rx << "\n";
  out << "t_scan = " << fmt_double(p.scan.t_scan) << "\n";
  out << "f_touch = " << fmt_double(p.scan.f_touch) << "\n";
  out << "delta_proc = " << fmt_double(p.scan.delta_proc) << "\n";
  out << "rx_leak_gain = " << fmt_double(p.rx_leak_gain) << "\n";
  out << "v_tx_amplitude = " << fmt_double(p.circuit.v_tx_amplitude) << "\n";
  out << "r_tx = " << fmt_double(p.circuit.r_tx) << "\n";
  out << "r_rx = " << fmt_double(p.circuit.r_rx) << "\n";
  out << "c_0 = " << fmt_double(p.circuit.c_0) << "\n";
  out << "f_drive = " << fmt_double(p.circuit.f_drive) << "\n";
  out << "scan_order_randomized = " << (p.scan_order_randomized ? "1" : "0")
      << "\n";
  out << "scan_order_seed = " << fmt_u64(p.scan_order_seed) << "\n";
  return out.str();
}

DeviceProfile profile_from_string(const std::string& text,
                                  const std::string& origin) {
  auto fail = [&](int line, const std::string& msg) -> void {
    throw FileError(FileError::Kind::parse,
                    origin + ":" + std::to_string(line) + ": " + msg);
  };

  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) fail(lineno, "empty key or value");
    if (kv.count(key)) fail(lineno, "duplicate key '" + key + "'");
    kv[key] = val;
  }

  DeviceProfile p;
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw FileError(FileError::Kind::parse,
                      origin + ": missing key '" + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto as_double = [&](const std::string& key) {
    std::string v = take(key);
    double d = 0.0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), d);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
      throw FileError(FileError::Kind::parse,
                      origin + ": bad number for '" + key + "': " + v);
    return d;
  };
  auto as_int = [&](const std::string& key) {
    double d = as_double(key);
    return static_cast<int>(d);
  };

  p.name = take("name");
  p.screen_w = as_double("screen_w");
  p.screen_h = as_double("screen_h");
  p.scan.n_tx = as_int("n_tx");
  p.scan.n_rx = as_int("n_rx");
  p.scan.t_scan = as_double("t_scan");
  p.scan.f_touch = as_double("f_touch");
  p.scan.delta_proc = as_double("delta_proc");
  p.rx_leak_gain = as_double("rx_leak_gain");
  p.circuit.v_tx_amplitude = as_double("v_tx_amplitude");
  p.circuit.r_tx = as_double("r_tx");
  p.circuit.r_rx = as_double("r_rx");
  p.circuit.c_0 = as_double("c_0");
  p.circuit.f_drive = as_double("f_drive");
  p.scan_order_randomized = as_int("scan_order_randomized") != 0;
  p.scan_order_seed = static_cast<std::uint64_t>(as_double("scan_order_seed"));
  if (!kv.empty())
    throw FileError(FileError::Kind::parse,
                    origin + ": unknown key '" + kv.begin()->first + "'");
  p.validate();
  return p;
}

DeviceProfile load_profile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FileError(FileError::Kind::io, "cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return profile_from_string(buf.str(), path);
}

void save_profile(const DeviceProfile& p, const std::string& path) {
  p.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FileError(FileError::Kind::io, "cannot open " + path);
  f << profile_to_string(p);
  if (!f) throw FileError(FileError::Kind::io, "write failed: " + path);
}

namespace {

DeviceProfile make_profile(const std::string& name, double f_touch, int n_tx,
                           int n_rx, double w, double h) {
  DeviceProfile p;
  p.name = name;
  p.scan.f_touch = f_touch;
  p.scan.t_scan = 1.0 / f_touch;
  p.scan.n_tx = n_tx;
  p.scan.n_rx = n_rx;
  p.screen_w = w;
  p.screen_h = h;
  return p;
}

}  // namespace

DeviceProfile builtin_profile(const std::string& name) {
  if (name == "iphone_7")
    return make_profile("iphone_7", 60.0, 16, 32, 0.0585, 0.1040);
  if (name == "iphone_x")
    return make_profile("iphone_x", 120.0, 16, 32, 0.0624, 0.1350);
  if (name == "xiaomi_10_pro")
    return make_profile("xiaomi_10_pro", 180.0, 18, 34, 0.0695, 0.1510);
  if (name == "samsung_s10")
    return make_profile("samsung_s10", 120.0, 16, 32, 0.0663, 0.1400);
  if (name == "huawei_mate30_pro")
    return make_profile("huawei_mate30_pro", 120.0, 16, 32, 0.0730, 0.1580);
  throw DomainError("unknown builtin profile '" + name + "'");
}

std::vector<std::string> builtin_profile_names() {
  return {"iphone_7", "iphone_x", "xiaomi_10_pro", "samsung_s10",
          "huawei_mate30_pro"};
}

}  // namespace scanleak
