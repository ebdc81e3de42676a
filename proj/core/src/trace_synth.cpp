#include "scanleak/trace_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "scanleak/rng.hpp"
#include "scanleak/trajectory.hpp"

namespace scanleak {

namespace {

// A scan frame only reports a touch once the coupling is strong enough; the
// approach ramp is rendered up to this fraction of the full-contact response
// and the remaining rise happens at the contact instant. Keeping the ramp
// under the trigger detector's operating point is what makes the recorded
// contact-frame boundary the thing detectors actually find.
constexpr double kApproachCeiling = 0.4;

// Maximum share of one frame period an approach or release ramp may occupy.
constexpr double kRampFrameShare = 0.4;

// A touched column's ring-down counts as over once its contribution falls to
// this fraction of the scan bed; the frame's valid portion ends there.
constexpr double kRingResidue = 0.25;

// Invalid remainder of a frame: the drive stops at the end of the valid
// portion and the residue decays with this time constant, in frame periods.
constexpr double kTailFrac = 0.2;

// Residue amplitude right after the drive stops, as a fraction of the bed.
// The drop below the bed level is what hands a boundary to variance-gated
// termination detectors.
constexpr double kTailLevel = 0.35;

// Normalized coupling response: 0 with no finger, 1 at full contact.
// The shape follows the crossing circuit as the finger capacitance rises.
struct CouplingScale {
  const CouplingCircuit* circuit = nullptr;
  double area = 1.0e-4;
  double untouched_mag = 0.0;
  double full_delta = 0.0;

  CouplingScale(const DeviceProfile& p, const SynthConfig& cfg)
      : circuit(&p.circuit), area(cfg.contact_area) {
    untouched_mag = std::abs(drive_voltage_untouched(*circuit));
    const FingerState full = FingerState::at(kContactFloor, area);
    full_delta =
        std::abs(drive_voltage_touched(*circuit, full)) - untouched_mag;
    if (!(full_delta > 0.0))
      throw DomainError("synth: circuit has no touch response");
  }

  double frac_at(double distance) const {
    const FingerState f = FingerState::at(distance, area);
    const double delta =
        std::abs(drive_voltage_touched(*circuit, f)) - untouched_mag;
    return std::max(0.0, delta / full_delta);
  }

  // Distance at which the response reaches `target` (monotone decreasing in
  // distance, so plain bisection).
  double distance_for(double target, double d_far) const {
    double lo = kContactFloor, hi = d_far;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (frac_at(mid) > target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

// Per-frame burst layout: one excitation slot per TX column, each slot's
// burst weighted by how strongly the finger couples into that column.
struct FrameLayout {
  std::vector<double> weight;      // per slot, in [base_level, 1]
  std::vector<double> sigma_fall;  // per slot, samples
  double sigma_rise = 0.0;         // samples, shared
  double slot_samples = 0.0;
  double valid_end = 0.0;  // samples from frame start where the strongest
                           // ring-down meets the idle-column bed
};

// Triangular cross-column coupling: a touch between two column centres splits
// its energy between them; the weights sum to one on the interior and are
// renormalized at the screen edges.
std::vector<double> column_weights(double x, const DeviceProfile& p) {
  const int n = p.scan.n_tx;
  const double pitch = p.screen_w / n;
  std::vector<double> k(n, 0.0);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double centre = (j + 0.5) * pitch;
    const double v = std::max(0.0, 1.0 - std::abs(x - centre) / pitch);
    k[j] = v;
    sum += v;
  }
  if (sum <= 0.0) throw DomainError("synth: touch position off the column grid");
  for (double& v : k) v /= sum;
  return k;
}

FrameLayout make_layout(double x, const DeviceProfile& p,
                        const std::vector<std::size_t>& slot_of_column,
                        double slot_samples, const SynthConfig& cfg) {
  const int n = p.scan.n_tx;
  const std::vector<double> kappa = column_weights(x, p);
  FrameLayout fl;
  fl.weight.assign(n, cfg.base_level);
  fl.sigma_fall.assign(n, cfg.sigma_frac * slot_samples);
  fl.sigma_rise = cfg.sigma_frac * slot_samples;
  fl.slot_samples = slot_samples;
  for (int col = 0; col < n; ++col) {
    if (kappa[col] <= 0.0) continue;
    const std::size_t slot = slot_of_column[col];
    fl.weight[slot] = cfg.base_level + (1.0 - cfg.base_level) * kappa[col];
    fl.sigma_fall[slot] =
        (cfg.sigma_frac + (cfg.ring_frac - cfg.sigma_frac) * kappa[col]) *
        slot_samples;
  }
  // The valid portion of the frame ends where the strongest burst's ring-down
  // has decayed back to the idle-column level.
  double end = 0.0;
  for (int s = 0; s < n; ++s) {
    if (fl.weight[s] <= cfg.base_level * 1.0001) continue;
    const double u =
        fl.sigma_fall[s] *
        std::sqrt(2.0 * std::log(fl.weight[s] / cfg.base_level));
    end = std::max(end, (s + 0.5) * slot_samples + u);
  }
  if (end == 0.0) end = slot_samples;  // degenerate: nothing above the bed
  fl.valid_end = end;
  return fl;
}

// Burst envelope of one frame at sample offset tau.
double frame_envelope(const FrameLayout& fl, double tau) {
  double env = 0.0;
  const std::size_t n = fl.weight.size();
  for (std::size_t s = 0; s < n; ++s) {
    const double centre = (s + 0.5) * fl.slot_samples;
    const double d = tau - centre;
    const double sigma = d < 0.0 ? fl.sigma_rise : fl.sigma_fall[s];
    const double a = d / sigma;
    if (std::abs(a) > 6.0) continue;
    env += fl.weight[s] * std::exp(-0.5 * a * a);
  }
  return env;
}

std::vector<std::size_t> identity_slots(int n) {
  std::vector<std::size_t> v(n);
  for (int i = 0; i < n; ++i) v[i] = static_cast<std::size_t>(i);
  return v;
}

std::vector<std::size_t> slots_for_frame(const DeviceProfile& p,
                                         long long frame) {
  if (!p.scan_order_randomized) return identity_slots(p.scan.n_tx);
  Rng rng(derive_seed(p.scan_order_seed, "scan-order",
                      static_cast<std::uint64_t>(frame)));
  return rng.permutation(static_cast<std::size_t>(p.scan.n_tx));
}

// One touch, fully resolved onto the frame grid.
struct EventPlan {
  double x = 0.0, y = 0.0;
  double t_ramp = 0.0;   // approach begins
  double t_c = 0.0;      // contact begins (on the frame grid)
  double t_e = 0.0;      // contact ends (on the frame grid)
  double t_end = 0.0;    // release ramp ends
  double t_a = 0.0, t_r = 0.0;
  double d_stop = 0.0;   // approach ramp's final hover distance
  long long first_frame = 0, end_frame = 0;  // contact frames [first, end)
  std::string label;
  int column = 0, row = 0;  // 0 when the event was given as a position
};

EventPlan plan_event(const DeviceProfile& p, double x, double y,
                     const TouchEvent& shape, double onset,
                     const CouplingScale& coupling, const SynthConfig& cfg) {
  if (!(shape.t_approach > 0.0) || !(shape.t_contact > 0.0) ||
      !(shape.t_release > 0.0))
    throw DomainError("synth: touch phase durations must be positive");
  if (x < 0.0 || x > p.screen_w || y < 0.0 || y > p.screen_h)
    throw DomainError("synth: touch position off screen");

  const double T = p.scan.t_scan;
  EventPlan ev;
  ev.x = x;
  ev.y = y;
  ev.label = shape.label;
  ev.t_a = std::min(shape.t_approach, kRampFrameShare * T);
  ev.t_r = std::min(shape.t_release, kRampFrameShare * T);
  ev.first_frame =
      static_cast<long long>(std::ceil((onset + ev.t_a) / T - 1e-9));
  ev.t_c = static_cast<double>(ev.first_frame) * T;
  ev.t_ramp = ev.t_c - ev.t_a;
  const long long n_frames =
      std::max<long long>(1, std::llround(shape.t_contact / T));
  ev.end_frame = ev.first_frame + n_frames;
  ev.t_e = static_cast<double>(ev.end_frame) * T;
  ev.t_end = ev.t_e + ev.t_r;
  ev.d_stop = coupling.distance_for(kApproachCeiling, cfg.approach_start);
  return ev;
}

// Coupling envelope of the event at absolute time t: the approach ramp walks
// the finger down a log-spaced distance profile (so the response follows the
// circuit), contact holds at 1, release mirrors the approach.
double event_envelope(const EventPlan& ev, const CouplingScale& coupling,
                      const SynthConfig& cfg, double t) {
  if (t < ev.t_ramp || t >= ev.t_end) return 0.0;
  if (t >= ev.t_c && t < ev.t_e) return 1.0;
  double u;  // 1 at the contact side of the ramp, 0 at the far side
  if (t < ev.t_c)
    u = (t - ev.t_ramp) / ev.t_a;
  else
    u = 1.0 - (t - ev.t_e) / ev.t_r;
  const double d =
      cfg.approach_start * std::pow(ev.d_stop / cfg.approach_start, u);
  return coupling.frac_at(d);
}

struct FrameTruth {
  long long t0 = 0;         // spike sample
  long long valid_end = 0;  // end of the informative portion
};

// Renders one event into `samples` and reports per-contact-frame truth.
std::vector<FrameTruth> render_event(std::vector<float>& samples, double fs,
                                     const DeviceProfile& p,
                                     const EventPlan& ev,
                                     const CouplingScale& coupling,
                                     double amplitude, const SynthConfig& cfg) {
  const double T = p.scan.t_scan;
  const double frame_samples = T * fs;
  const double slot_samples = frame_samples / p.scan.n_tx;
  const double row_factor = 1.0 + p.rx_leak_gain * (ev.y / p.screen_h);
  const double omega =
      2.0 * std::numbers::pi * cfg.cycles_per_slot / slot_samples;

  const auto first_active =
      static_cast<long long>(std::floor(ev.t_ramp / T));
  const auto last_active =
      static_cast<long long>(std::floor((ev.t_end - 1e-12) / T));
  std::vector<FrameTruth> truth;

  for (long long k = first_active; k <= last_active; ++k) {
    const long long s0 = std::llround(static_cast<double>(k) * frame_samples);
    const long long s1 =
        std::llround(static_cast<double>(k + 1) * frame_samples);
    if (s0 >= static_cast<long long>(samples.size())) break;
    const FrameLayout fl =
        make_layout(ev.x, p, slots_for_frame(p, k), slot_samples, cfg);

    const bool contact_frame = k >= ev.first_frame && k < ev.end_frame;
    if (contact_frame)
      truth.push_back({s0, s0 + std::llround(fl.valid_end)});

    const long long s_stop =
        std::min<long long>(s1, static_cast<long long>(samples.size()));
    for (long long i = s0; i < s_stop; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double e = event_envelope(ev, coupling, cfg, t);
      if (e <= 0.0) continue;
      const double tau = static_cast<double>(i - s0);
      double v = e * row_factor * frame_envelope(fl, tau) *
                 std::cos(omega * tau);
      if (i == s0 && e >= kSpikeGate) v += e * cfg.trigger_gain;
      samples[static_cast<std::size_t>(i)] +=
          static_cast<float>(amplitude * v);
    }
  }
  return truth;
}

void write_event_meta(EmTrace& trace, std::size_t index, const EventPlan& ev,
                      const std::vector<FrameTruth>& frames) {
  const std::string pre = "event" + std::to_string(index) + "_";
  trace.meta_set(pre + "t0", std::to_string(frames.front().t0));
  trace.meta_set(pre + "t1", std::to_string(frames.back().valid_end));
  trace.meta_set(pre + "label", ev.label);
  trace.meta_set(pre + "column", std::to_string(ev.column));
  trace.meta_set(pre + "row", std::to_string(ev.row));
}

void write_common_meta(EmTrace& trace, const DeviceProfile& p,
                       const NoiseModel& noise, double distance,
                       std::uint64_t seed) {
  trace.profile_name = p.name;
  trace.meta_set("seed", std::to_string(seed));
  trace.meta_set_double("distance", distance);
  trace.meta_set_double("noise_sigma", noise.gaussian_sigma);
}

EmTrace finish(EmTrace trace, const NoiseModel& noise, std::uint64_t seed) {
  if (noise.is_silent()) return trace;
  NoiseModel bound = noise;
  bound.seed = derive_seed(seed, "noise");
  return add_noise(trace, bound);
}

EmTrace synth_one(const DeviceProfile& profile, double x, double y,
                  const TouchEvent& shape, const NoiseModel& noise,
                  double distance, std::uint64_t seed, const SynthConfig& cfg,
                  int column, int row) {
  profile.validate();
  if (!(distance > 0.0)) throw DomainError("synth: distance must be positive");

  const CouplingScale coupling(profile, cfg);
  EventPlan ev =
      plan_event(profile, x, y, shape, cfg.pre_gap, coupling, cfg);
  ev.column = column;
  ev.row = row;
  const double amplitude = reference_amplitude(profile, distance, cfg);

  EmTrace trace;
  trace.sample_rate = cfg.sample_rate;
  const double duration = ev.t_end + cfg.post_gap;
  trace.samples.assign(
      static_cast<std::size_t>(std::llround(duration * cfg.sample_rate)),
      0.0f);

  const std::vector<FrameTruth> frames =
      render_event(trace.samples, cfg.sample_rate, profile, ev, coupling,
                   amplitude, cfg);

  write_common_meta(trace, profile, noise, distance, seed);
  trace.meta_set("label", shape.label);
  trace.meta_set("column", std::to_string(column));
  trace.meta_set("row", std::to_string(row));
  trace.meta_set_double("x", x);
  trace.meta_set_double("y", y);
  trace.meta_set_double("amplitude", amplitude);
  trace.meta_set("event_count", "1");
  write_event_meta(trace, 0, ev, frames);
  trace.meta_set("frame_count", std::to_string(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    trace.meta_set("frame" + std::to_string(i) + "_t0",
                   std::to_string(frames[i].t0));
    trace.meta_set("frame" + std::to_string(i) + "_valid_end",
                   std::to_string(frames[i].valid_end));
  }
  return finish(std::move(trace), noise, seed);
}

}  // namespace

double reference_amplitude(const DeviceProfile& profile, double distance,
                           const SynthConfig& cfg) {
  if (!(distance > 0.0)) throw DomainError("synth: distance must be positive");
  const CouplingScale coupling(profile, cfg);
  return coupling.full_delta *
         std::pow(kReferenceDistance / distance, cfg.k_exp);
}

EmTrace synthesize_touch_trace(const DeviceProfile& profile,
                               const TouchEvent& event,
                               const NoiseModel& noise, double distance,
                               std::uint64_t seed, const SynthConfig& cfg) {
  if (event.column < 1 || event.column > profile.scan.n_tx ||
      event.row < 1 || event.row > profile.scan.n_rx)
    throw DomainError("synth: touch event off screen");
  const double x =
      (event.column - 0.5) * profile.screen_w / profile.scan.n_tx;
  const double y = (event.row - 0.5) * profile.screen_h / profile.scan.n_rx;
  return synth_one(profile, x, y, event, noise, distance, seed, cfg,
                   event.column, event.row);
}

EmTrace synthesize_touch_at(const DeviceProfile& profile, double x, double y,
                            const TouchEvent& shape, const NoiseModel& noise,
                            double distance, std::uint64_t seed,
                            const SynthConfig& cfg) {
  return synth_one(profile, x, y, shape, noise, distance, seed, cfg, 0, 0);
}

EmTrace synthesize_session(const DeviceProfile& profile,
                           const TouchSession& session,
                           const NoiseModel& noise, double distance,
                           std::uint64_t seed, const SynthConfig& cfg) {
  profile.validate();
  if (!(distance > 0.0)) throw DomainError("synth: distance must be positive");
  if (!(session.duration > 0.0))
    throw DomainError("synth: session duration must be positive");

  const CouplingScale coupling(profile, cfg);
  const double amplitude = reference_amplitude(profile, distance, cfg);

  EmTrace trace;
  trace.sample_rate = cfg.sample_rate;
  trace.samples.assign(static_cast<std::size_t>(
                           std::llround(session.duration * cfg.sample_rate)),
                       0.0f);

  std::vector<EventPlan> plans;
  plans.reserve(session.entries.size());
  double prev_onset = -1.0, prev_end = -1.0;
  for (const SessionEntry& entry : session.entries) {
    if (entry.onset <= prev_onset)
      throw DomainError("synth: session onsets must be strictly increasing");
    prev_onset = entry.onset;
    const TouchEvent& e = entry.event;
    if (e.column < 1 || e.column > profile.scan.n_tx || e.row < 1 ||
        e.row > profile.scan.n_rx)
      throw DomainError("synth: session event off screen");
    const double x = (e.column - 0.5) * profile.screen_w / profile.scan.n_tx;
    const double y = (e.row - 0.5) * profile.screen_h / profile.scan.n_rx;
    EventPlan ev = plan_event(profile, x, y, e, entry.onset, coupling, cfg);
    ev.column = e.column;
    ev.row = e.row;
    if (ev.t_ramp <= prev_end)
      throw DomainError("synth: session events overlap");
    prev_end = ev.t_end;
    plans.push_back(std::move(ev));
  }

  write_common_meta(trace, profile, noise, distance, seed);
  trace.meta_set("session_kind", session_kind_name(session.kind));
  trace.meta_set("event_count", std::to_string(plans.size()));
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const std::vector<FrameTruth> frames =
        render_event(trace.samples, cfg.sample_rate, profile, plans[i],
                     coupling, amplitude, cfg);
    if (frames.empty())
      throw DomainError("synth: session event " + std::to_string(i) +
                        " falls outside the trace");
    write_event_meta(trace, i, plans[i], frames);
  }
  return finish(std::move(trace), noise, seed);
}

EmTrace synthesize_handwriting(const DeviceProfile& profile,
                               const Trajectory& path, double speed,
                               const NoiseModel& noise, double distance,
                               std::uint64_t seed, const SynthConfig& cfg) {
  profile.validate();
  if (!(speed > 0.0)) throw DomainError("synth: speed must be positive");
  if (!(distance > 0.0)) throw DomainError("synth: distance must be positive");
  if (path.points.empty()) throw DomainError("synth: empty trajectory");
  for (const TrajPoint& pt : path.points)
    if (pt.x < 0.0 || pt.x > profile.screen_w || pt.y < 0.0 ||
        pt.y > profile.screen_h)
      throw DomainError("synth: trajectory exits the screen");

  // Re-time each stroke to constant speed along its arc, with a pen-up gap
  // between strokes. A zero-length stroke (a dwell) keeps its own duration.
  struct Leg {
    double t0, t1;     // absolute pen-down interval
    std::size_t a, b;  // point range [a, b]
    std::vector<double> arc;  // cumulative arc length per point in the leg
    int stroke;
  };
  std::vector<std::size_t> starts = {0};
  for (std::size_t s : path.stroke_starts)
    if (s > 0 && s < path.points.size()) starts.push_back(s);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  const double T = profile.scan.t_scan;
  double clock =
      std::ceil(cfg.pre_gap / T - 1e-9) * T;  // pen-down on the frame grid
  std::vector<Leg> legs;
  for (std::size_t li = 0; li < starts.size(); ++li) {
    Leg leg;
    leg.a = starts[li];
    leg.b = (li + 1 < starts.size() ? starts[li + 1] : path.points.size()) - 1;
    leg.stroke = static_cast<int>(li);
    leg.arc.assign(leg.b - leg.a + 1, 0.0);
    for (std::size_t i = leg.a + 1; i <= leg.b; ++i) {
      const auto& p0 = path.points[i - 1];
      const auto& p1 = path.points[i];
      leg.arc[i - leg.a] = leg.arc[i - leg.a - 1] +
                           std::hypot(p1.x - p0.x, p1.y - p0.y);
    }
    const double length = leg.arc.back();
    const double span = path.points[leg.b].t - path.points[leg.a].t;
    const double dur = length > 0.0 ? length / speed
                                    : std::max(span, T);  // dwell in place
    leg.t0 = clock;
    leg.t1 = clock + dur;
    clock = leg.t1 + cfg.stroke_gap;
    legs.push_back(std::move(leg));
  }

  const auto position_at = [&](const Leg& leg, double t, double* x,
                               double* y) {
    if (leg.arc.back() <= 0.0) {
      *x = path.points[leg.a].x;
      *y = path.points[leg.a].y;
      return;
    }
    const double target =
        leg.arc.back() * std::clamp((t - leg.t0) / (leg.t1 - leg.t0), 0.0, 1.0);
    std::size_t i = 1;
    while (i < leg.arc.size() && leg.arc[i] < target) ++i;
    if (i >= leg.arc.size()) i = leg.arc.size() - 1;
    const double seg = leg.arc[i] - leg.arc[i - 1];
    const double f = seg > 0.0 ? (target - leg.arc[i - 1]) / seg : 0.0;
    const auto& p0 = path.points[leg.a + i - 1];
    const auto& p1 = path.points[leg.a + i];
    *x = p0.x + f * (p1.x - p0.x);
    *y = p0.y + f * (p1.y - p0.y);
  };

  const double fs = cfg.sample_rate;
  const double frame_samples = T * fs;
  const double slot_samples = frame_samples / profile.scan.n_tx;
  const double omega =
      2.0 * std::numbers::pi * cfg.cycles_per_slot / slot_samples;
  const CouplingScale coupling(profile, cfg);
  const double amplitude = reference_amplitude(profile, distance, cfg);
  const GridSpec grid{15, 32, profile.screen_w, profile.screen_h};

  EmTrace trace;
  trace.sample_rate = fs;
  trace.samples.assign(
      static_cast<std::size_t>(
          std::llround((legs.back().t1 + cfg.post_gap) * fs)),
      0.0f);

  std::size_t frame_index = 0;
  for (const Leg& leg : legs) {
    const auto k0 = static_cast<long long>(std::ceil(leg.t0 / T - 1e-9));
    for (long long k = k0; static_cast<double>(k) * T < leg.t1 - 1e-12; ++k) {
      const double t_frame = static_cast<double>(k) * T;
      double x, y;
      position_at(leg, t_frame, &x, &y);
      const long long s0 = std::llround(static_cast<double>(k) * frame_samples);
      const long long s1 =
          std::llround(static_cast<double>(k + 1) * frame_samples);
      if (s0 >= static_cast<long long>(trace.samples.size())) break;
      const FrameLayout fl = make_layout(x, profile, slots_for_frame(profile, k),
                                         slot_samples, cfg);
      const double row_factor = 1.0 + profile.rx_leak_gain * (y / profile.screen_h);
      const long long stop = std::min<long long>(
          s1, static_cast<long long>(trace.samples.size()));
      for (long long i = s0; i < stop; ++i) {
        const double tau = static_cast<double>(i - s0);
        double v = row_factor * frame_envelope(fl, tau) * std::cos(omega * tau);
        if (i == s0) v += cfg.trigger_gain;
        trace.samples[static_cast<std::size_t>(i)] +=
            static_cast<float>(amplitude * v);
      }
      const std::string pre = "frame" + std::to_string(frame_index) + "_";
      trace.meta_set(pre + "t0", std::to_string(s0));
      trace.meta_set(pre + "valid_end", std::to_string(s0 + std::llround(fl.valid_end)));
      trace.meta_set(pre + "zone", std::to_string(grid_zone(x, y, grid)));
      trace.meta_set_double(pre + "x", x);
      trace.meta_set_double(pre + "y", y);
      trace.meta_set(pre + "stroke", std::to_string(leg.stroke));
      ++frame_index;
    }
  }

  write_common_meta(trace, profile, noise, distance, seed);
  trace.meta_set("frame_count", std::to_string(frame_index));
  trace.meta_set("stroke_count", std::to_string(legs.size()));
  return finish(std::move(trace), noise, seed);
}

EmTrace add_noise(const EmTrace& trace, const NoiseModel& noise) {
  if (noise.gaussian_sigma < 0.0 || noise.mains_amp < 0.0 ||
      noise.background_app_amp < 0.0)
    throw DomainError("noise amplitudes must be non-negative");
  EmTrace out = trace;
  if (noise.is_silent()) return out;

  Rng rng(noise.seed);
  const double fs = trace.sample_rate;
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  // Background-electronics drift: an AR(1) walk with ~10 ms correlation time
  // and stationary standard deviation background_app_amp.
  const double rho = std::exp(-1.0 / (0.010 * fs));
  const double drift_scale =
      noise.background_app_amp * std::sqrt(1.0 - rho * rho);
  double drift = noise.background_app_amp > 0.0
                     ? noise.background_app_amp * rng.normal()
                     : 0.0;

  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    double v = 0.0;
    if (noise.gaussian_sigma > 0.0) v += noise.gaussian_sigma * rng.normal();
    if (noise.mains_amp > 0.0)
      v += noise.mains_amp *
           std::sin(2.0 * std::numbers::pi * noise.mains_hz *
                        static_cast<double>(i) / fs +
                    phase);
    if (noise.background_app_amp > 0.0) {
      v += drift;
      drift = rho * drift + drift_scale * rng.normal();
    }
    out.samples[i] += static_cast<float>(v);
  }
  return out;
}

EmTrace attenuate(const EmTrace& trace, double distance, double k_exp) {
  if (!(distance > 0.0))
    throw DomainError("attenuate: distance must be positive");
  const double scale = std::pow(kReferenceDistance / distance, k_exp);
  EmTrace out = trace;
  for (float& s : out.samples) s = static_cast<float>(s * scale);
  return out;
}

}  // namespace scanleak
