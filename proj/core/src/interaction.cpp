#include "scanleak/interaction.hpp"

#include <cmath>

#include "scanleak/errors.hpp"

namespace scanleak {

const std::array<const char*, 6>& InteractionFeatures::names() {
  static const std::array<const char*, 6> kNames = {
      "touch_count",       "mean_contact_duration",
      "std_contact_duration", "mean_inter_touch_interval",
      "touch_rate",        "duty_cycle"};
  return kNames;
}

InteractionFeatures extract_interaction_features(
    const EmTrace& trace, const SegmentationParams& params,
    double frame_period, double gap_factor) {
  trace.validate();
  if (!(frame_period > 0.0))
    throw DomainError("interaction: frame period must be positive");
  if (!(gap_factor > 0.0))
    throw DomainError("interaction: gap factor must be positive");

  const std::vector<InterceptResult> frames = intercept_all(trace, params);
  InteractionFeatures out;
  if (frames.empty()) return out;

  // The interceptor reports one segment per scan cycle; consecutive cycles of
  // a sustained touch are one frame period apart, so anything farther apart
  // than gap_factor periods starts a new touch.
  const double fs = trace.sample_rate;
  const double gap_limit = gap_factor * frame_period;
  struct Touch {
    double onset, end;
  };
  std::vector<Touch> touches;
  double prev_trigger = 0.0;
  for (const InterceptResult& seg : frames) {
    const double t0 = static_cast<double>(seg.bounds.t_tri) / fs;
    const double t1 = static_cast<double>(seg.bounds.t_ter) / fs;
    if (touches.empty() || t0 - prev_trigger > gap_limit)
      touches.push_back({t0, t1});
    else
      touches.back().end = t1;
    prev_trigger = t0;
  }

  const double n = static_cast<double>(touches.size());
  out.touch_count = n;

  double dur_sum = 0.0, dur_sq = 0.0, contact_total = 0.0;
  for (const Touch& t : touches) {
    const double d = t.end - t.onset;
    dur_sum += d;
    dur_sq += d * d;
    contact_total += d;
  }
  out.mean_contact_duration = dur_sum / n;
  const double var =
      std::max(0.0, dur_sq / n - out.mean_contact_duration *
                                     out.mean_contact_duration);
  out.std_contact_duration = std::sqrt(var);

  if (touches.size() > 1) {
    double gap_sum = 0.0;
    for (std::size_t i = 1; i < touches.size(); ++i)
      gap_sum += touches[i].onset - touches[i - 1].onset;
    out.mean_inter_touch_interval =
        gap_sum / static_cast<double>(touches.size() - 1);
  }

  const double duration = trace.duration();
  if (duration > 0.0) {
    out.touch_rate = n / duration;
    out.duty_cycle = contact_total / duration;
  }
  return out;
}

}  // namespace scanleak
