#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "scanleak/errors.hpp"

namespace scanleak {

// Parallel-plate scale constant for the finger-to-screen coupling capacitance,
// in farads * meter (epsilon_0 absorbed into a single knob).
inline constexpr double kCapConstant = 8.85e-12;

// Gap clamp in meters: a finger "in contact" still sits a finite distance
// above the electrode stack, so the capacitance stays bounded.
inline constexpr double kContactFloor = 1.0e-4;

// Reference distance for field attenuation, meters.
inline constexpr double kReferenceDistance = 0.05;

// Lumped TX-to-RX coupling path of one electrode crossing.
// The constants are representative orders of magnitude for a touch AFE, not
// measurements of any real device.
struct CouplingCircuit {
  double v_tx_amplitude = 1.0;  // drive amplitude, volts
  double r_tx = 1.0e3;          // ohms
  double r_rx = 1.0e3;          // ohms
  double c_0 = 1.0e-12;         // mutual capacitance of the crossing, farads
  double f_drive = 1.0e5;       // excitation frequency, hertz

  void validate() const;  // throws DomainError on non-positive values
};

// Finger position relative to the screen surface.
struct FingerState {
  double distance = 1.0;          // meters above the surface
  double contact_area = 1.0e-4;   // square meters
  double coupling_capacitance = 0.0;  // farads, derived from the above

  // No finger anywhere near the screen: zero coupling capacitance.
  static FingerState absent();
  // Finger hovering at (or touching, when distance <= the contact floor)
  // the given distance. Capacitance is filled in from the plate model.
  static FingerState at(double distance, double contact_area = 1.0e-4,
                        double k_cap = kCapConstant);
};

// Plate-model coupling capacitance, farads. The distance is clamped at the
// contact floor so touching does not diverge.
double finger_capacitance(double distance, double contact_area,
                          double k_cap = kCapConstant);

// Time-division scan schedule of the TX electrode sheet.
struct ScanTiming {
  int n_tx = 16;                 // driven columns
  int n_rx = 32;                 // sensed rows
  double t_scan = 1.0 / 120.0;   // seconds per full frame
  double delta_proc = 0.0;       // constant processing offset, seconds
  double f_touch = 120.0;        // touch sampling frequency, hertz

  void validate() const;  // also enforces f_touch * t_scan == 1 within 1e-9
};

// Start time of column x's excitation slot within a frame, seconds.
// Columns are 1-based; x outside [1, n_tx] throws DomainError.
double scan_delay(int x, const ScanTiming& timing);

// Everything the synthesizer needs to know about one handset.
struct DeviceProfile {
  std::string name;
  CouplingCircuit circuit;
  ScanTiming scan;
  double screen_w = 0.0624;   // meters
  double screen_h = 0.1350;   // meters
  double rx_leak_gain = 0.05; // relative row-to-row amplitude spread, [0, 1]

  // Scan-order randomization countermeasure: when enabled, each frame's TX
  // activation order is drawn from scan_order_seed instead of being 1..n_tx.
  bool scan_order_randomized = false;
  std::uint64_t scan_order_seed = 0;

  void validate() const;
};

// Untouched drive voltage seen at the RX side of one crossing.
std::complex<double> drive_voltage_untouched(const CouplingCircuit& c);

// Impedance change introduced by a coupled finger. The C_f = 0 limit returns
// the series branch impedance analytically instead of dividing twice.
std::complex<double> coupling_impedance(const FingerState& finger,
                                        const CouplingCircuit& c);

// Drive voltage with a finger coupled into the path.
std::complex<double> drive_voltage_touched(const CouplingCircuit& c,
                                           const FingerState& finger);

// ---- profile files ----------------------------------------------------------
// Human-readable key = value text, one pair per line, '#' comments.
// save_profile writes the canonical form (fixed key order, shortest float
// representation), so save(load(save(x))) is byte-identical to save(x).

DeviceProfile load_profile(const std::string& path);
void save_profile(const DeviceProfile& p, const std::string& path);
std::string profile_to_string(const DeviceProfile& p);
DeviceProfile profile_from_string(const std::string& text,
                                  const std::string& origin = "<string>");

// Profiles for a handful of real handsets. Scan rates are the published touch
// sampling rates; circuit constants and screen dimensions are representative
// values, not measurements.
DeviceProfile builtin_profile(const std::string& name);
std::vector<std::string> builtin_profile_names();

}  // namespace scanleak
