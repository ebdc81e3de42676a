#include "scanleak/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scanleak {

SegmentationParams SegmentationParams::auto_from_prefix(
    const std::vector<float>& signal, std::size_t w) {
  if (w < 2) throw DomainError("auto_from_prefix: window must be >= 2");
  if (signal.size() < 2 * w)
    throw DomainError("auto_from_prefix: need at least 2w samples, have " +
                      std::to_string(signal.size()));

  std::vector<double> diffs;
  diffs.reserve(2 * w - 1);
  for (std::size_t i = 1; i < 2 * w; ++i)
    diffs.push_back(std::abs(static_cast<double>(signal[i]) -
                             static_cast<double>(signal[i - 1])));
  std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2,
                   diffs.end());
  const double med = diffs[diffs.size() / 2];

  SegmentationParams p;
  p.w = w;
  p.d_tri = 5.0 * med;
  p.d_ter = 0.2 * p.d_tri;
  // Variance gates stay permissive: the prefix carries no information about
  // in-burst variance, so only the slope thresholds do real work here.
  const double slope_var = p.d_tri * (w - 1) * p.d_tri * (w - 1);
  p.v_tri = 400.0 * slope_var;
  p.v_ter = 25.0 * slope_var;
  return p;
}

SegmentationParams SegmentationParams::calibrated(double peak_amplitude,
                                                  std::size_t w) {
  if (w < 2) throw DomainError("calibrated: window must be >= 2");
  if (!(peak_amplitude > 0.0))
    throw DomainError("calibrated: peak amplitude must be positive");

  // The trigger spike rises by the full peak within one sample, so its window
  // slope is about peak/(w-1); gate at 40% of that. Termination requires the
  // slope back under 8% with the window variance near the quiet floor.
  SegmentationParams p;
  p.w = w;
  p.d_tri = 0.40 * peak_amplitude / static_cast<double>(w - 1);
  p.d_ter = 0.08 * peak_amplitude / static_cast<double>(w - 1);
  p.v_tri = peak_amplitude * peak_amplitude;
  p.v_ter = 0.009 * peak_amplitude * peak_amplitude;
  return p;
}

void SegmentationParams::validate() const {
  if (w < 2) throw DomainError("segmentation: window must be >= 2");
  if (!(d_tri > 0.0)) throw DomainError("segmentation: d_tri must be > 0");
  if (!(d_ter > 0.0)) throw DomainError("segmentation: d_ter must be > 0");
  if (!(v_tri > 0.0)) throw DomainError("segmentation: v_tri must be > 0");
  if (!(v_ter > 0.0)) throw DomainError("segmentation: v_ter must be > 0");
}

double window_variance(const std::vector<float>& signal, std::size_t t,
                       std::size_t w) {
  if (w < 1 || t + w > signal.size())
    throw DomainError("window_variance: window out of range");
  double mean = 0.0;
  for (std::size_t i = t; i < t + w; ++i) mean += signal[i];
  mean /= static_cast<double>(w);
  double var = 0.0;
  for (std::size_t i = t; i < t + w; ++i) {
    const double d = static_cast<double>(signal[i]) - mean;
    var += d * d;
  }
  return var / static_cast<double>(w);
}

double window_derivative(const std::vector<float>& signal, std::size_t t,
                         std::size_t w) {
  if (w < 2 || t + w > signal.size())
    throw DomainError("window_derivative: window out of range");
  return (static_cast<double>(signal[t + w - 1]) -
          static_cast<double>(signal[t])) /
         static_cast<double>(w - 1);
}

namespace {

// Core scan starting at `from`. Returns false if no trigger fires; throws
// NoTerminationError if one fires but never settles.
bool scan_one(const std::vector<float>& signal, const SegmentationParams& p,
              std::size_t from, SegmentBounds* out) {
  if (signal.size() < p.w || from + p.w > signal.size()) return false;
  const std::size_t last = signal.size() - p.w;

  std::size_t t_tri = 0;
  bool triggered = false;
  for (std::size_t t = from; t <= last; ++t) {
    if (window_derivative(signal, t, p.w) > p.d_tri &&
        window_variance(signal, t, p.w) < p.v_tri) {
      t_tri = t;
      triggered = true;
      break;
    }
  }
  if (!triggered) return false;

  for (std::size_t t = t_tri + 1; t <= last; ++t) {
    if (window_derivative(signal, t, p.w) < p.d_ter &&
        window_variance(signal, t, p.w) < p.v_ter) {
      out->t_tri = t_tri;
      out->t_ter = t;
      return true;
    }
  }
  throw NoTerminationError("segment at sample " + std::to_string(t_tri) +
                           " never stabilizes");
}

InterceptResult cut(const std::vector<float>& signal,
                    const SegmentBounds& b) {
  InterceptResult r;
  r.bounds = b;
  r.valid.assign(signal.begin() + static_cast<std::ptrdiff_t>(b.t_tri),
                 signal.begin() + static_cast<std::ptrdiff_t>(b.t_ter) + 1);
  return r;
}

}  // namespace

InterceptResult intercept(const std::vector<float>& signal,
                          const SegmentationParams& params) {
  params.validate();
  if (signal.size() < params.w)
    throw DomainError("intercept: signal shorter than window");
  SegmentBounds b;
  if (!scan_one(signal, params, 0, &b))
    throw NoTriggerError("no window exceeded the trigger threshold");
  return cut(signal, b);
}

std::vector<InterceptResult> intercept_all(const EmTrace& trace,
                                           const SegmentationParams& params) {
  params.validate();
  std::vector<InterceptResult> out;
  const std::vector<float>& s = trace.samples;
  std::size_t from = 0;
  while (from + params.w <= s.size()) {
    SegmentBounds b;
    if (!scan_one(s, params, from, &b)) break;
    out.push_back(cut(s, b));
    from = b.t_ter + 1;
  }
  return out;
}

}  // namespace scanleak
