#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scanleak/errors.hpp"

namespace scanleak {

// One captured (or synthesized) probe signal. Samples are volts at the probe.
// meta carries free-form key = value panels; the synthesizer records ground
// truth (event boundaries, per-frame bounds, labels) here so tests and the
// harness can score recovery without re-deriving anything.
struct EmTrace {
  std::vector<float> samples;
  double sample_rate = 500000.0;  // hertz
  std::string profile_name;
  std::map<std::string, std::string> meta;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  void validate() const;

  void meta_set(const std::string& key, const std::string& value) {
    meta[key] = value;
  }
  void meta_set_double(const std::string& key, double value);
  bool meta_has(const std::string& key) const { return meta.count(key) != 0; }
  const std::string& meta_get(const std::string& key) const;
  double meta_get_double(const std::string& key) const;
};

// One touch: ramp in, hold, ramp out. Durations are seconds; column and row
// are 1-based electrode indices.
struct TouchEvent {
  int column = 1;
  int row = 1;
  double t_approach = 0.01;
  double t_contact = 0.10;
  double t_release = 0.02;
  std::string label;
};

enum class SessionKind { screen_unlock, keyboard_input, app_operation, handwriting };

const char* session_kind_name(SessionKind k);
SessionKind session_kind_from_name(const std::string& name);

// A timed sequence of touches. Onsets are absolute seconds from trace start.
struct SessionEntry {
  double onset = 0.0;
  TouchEvent event;
};

struct TouchSession {
  SessionKind kind = SessionKind::keyboard_input;
  std::vector<SessionEntry> entries;
  double duration = 30.0;  // total trace length, seconds
};

// Additive interference model. All components are generated from `seed`:
// white Gaussian sample noise, a mains hum sinusoid, and a slow drift that
// stands in for background electronics activity.
struct NoiseModel {
  double gaussian_sigma = 0.0;     // volts
  double mains_hz = 50.0;          // hertz
  double mains_amp = 0.0;          // volts
  double background_app_amp = 0.0; // volts (std of the drift)
  std::uint64_t seed = 0;

  static NoiseModel silent() { return NoiseModel{}; }
  bool is_silent() const {
    return gaussian_sigma == 0.0 && mains_amp == 0.0 &&
           background_app_amp == 0.0;
  }
};

}  // namespace scanleak
