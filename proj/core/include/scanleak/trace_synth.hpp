#pragma once

#include <cstdint>

#include "scanleak/device_model.hpp"
#include "scanleak/trace.hpp"

namespace scanleak {

struct Trajectory;  // trajectory.hpp

// Waveform shaping knobs. The defaults produce the canonical per-frame
// morphology: a one-sample trigger spike at the frame boundary, then a
// carrier at base_level that the touched column's response rises out of
// (peaking at that column's excitation slot and ringing down), and once the
// ring-down rejoins the bed the drive stops and only a fading residue is
// left for the rest of the frame. The loud-until-done / quiet-after shape is
// what makes the recorded valid bounds recoverable by a detector.
struct SynthConfig {
  double sample_rate = 500000.0;  // hertz
  double pre_gap = 0.08;          // quiet seconds before the first event
  double post_gap = 0.06;         // quiet seconds after the last event
  double base_level = 0.40;       // scan-bed carrier amplitude, relative
  double trigger_gain = 3.0;      // frame-start spike height, relative
  double cycles_per_slot = 2.0;   // burst carrier cycles per excitation slot
  double sigma_frac = 0.18;       // burst half-width as a fraction of a slot
  double ring_frac = 0.90;        // touched-column ring-down sigma, slot frac
  double k_exp = 3.0;             // distance attenuation exponent
  double approach_start = 0.03;   // finger start distance for the ramp, m
  double contact_area = 1.0e-4;   // fingertip pad area, square meters
  double stroke_gap = 0.0125;     // pen-up seconds between handwriting strokes
};

// One touch at an electrode crossing -> probe trace.
// Ground truth written to meta: event/contact boundaries (sample indices),
// per-contact-frame trigger/valid bounds, column, row, label.
EmTrace synthesize_touch_trace(const DeviceProfile& profile,
                               const TouchEvent& event,
                               const NoiseModel& noise, double distance,
                               std::uint64_t seed,
                               const SynthConfig& cfg = {});

// Same, but at an arbitrary screen position (meters). A position between
// electrode centers splits its energy across the two neighbouring columns,
// which is what makes sub-electrode localisation possible downstream.
// `shape` supplies the timing envelope and label; its column/row are ignored.
EmTrace synthesize_touch_at(const DeviceProfile& profile, double x, double y,
                            const TouchEvent& shape, const NoiseModel& noise,
                            double distance, std::uint64_t seed,
                            const SynthConfig& cfg = {});

// A timed series of touches; gaps between events contain noise only.
// Ground truth: one boundary pair and label per event.
EmTrace synthesize_session(const DeviceProfile& profile,
                           const TouchSession& session,
                           const NoiseModel& noise, double distance,
                           std::uint64_t seed, const SynthConfig& cfg = {});

// Continuous contact following a trajectory. The path is re-timed to the
// given speed (meters/second) with a pen-up gap between strokes. Ground
// truth: per-frame bounds plus the occupied 32x15 grid zone per frame.
EmTrace synthesize_handwriting(const DeviceProfile& profile,
                               const Trajectory& path, double speed,
                               const NoiseModel& noise, double distance,
                               std::uint64_t seed,
                               const SynthConfig& cfg = {});

// Additive interference on an existing trace, deterministic in noise.seed.
EmTrace add_noise(const EmTrace& trace, const NoiseModel& noise);

// Free-space falloff relative to the reference probe distance:
// scale = (reference / distance) ^ k_exp. Identity at the reference distance.
EmTrace attenuate(const EmTrace& trace, double distance, double k_exp = 3.0);

// Amplitude of the touched-column burst at the probe for a full contact at
// the given distance. Scenario code derives noise sigma and interception
// thresholds from this.
double reference_amplitude(const DeviceProfile& profile, double distance,
                           const SynthConfig& cfg = {});

}  // namespace scanleak
