#pragma once

#include <cstddef>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/trace.hpp"

namespace scanleak {

// Inclusive sample bounds of one intercepted segment.
struct SegmentBounds {
  std::size_t t_tri = 0;  // trigger sample
  std::size_t t_ter = 0;  // termination sample, > t_tri
};

// Sliding-window interception thresholds. The detector walks the signal with
// a window of w samples; a segment opens at the first window whose mean
// forward difference exceeds d_tri while its variance stays under v_tri, and
// closes at the first later window whose difference drops under d_ter with
// variance under v_ter.
struct SegmentationParams {
  std::size_t w = 16;
  double d_tri = 0.0;
  double v_tri = 0.0;
  double d_ter = 0.0;
  double v_ter = 0.0;

  // Noise-floor calibration from the first 2w samples of a signal:
  // d_tri = 5x the median absolute sample-to-sample difference. Intended for
  // quiet-start signals at mild noise; the variance gates are left permissive
  // and the termination threshold is scaled off d_tri.
  static SegmentationParams auto_from_prefix(const std::vector<float>& signal,
                                             std::size_t w = 16);

  // Profiling-based calibration from a known peak amplitude (trigger spike
  // height at the probe). This is what the attack harness uses: the peak is
  // known from profiling traces, so thresholds sit at fixed fractions of it.
  static SegmentationParams calibrated(double peak_amplitude, std::size_t w);

  void validate() const;
};

// Window statistics, exposed for tests and tooling.
// Population variance of signal[t, t+w).
double window_variance(const std::vector<float>& signal, std::size_t t,
                       std::size_t w);
// Mean forward difference of signal[t, t+w): (s[t+w-1] - s[t]) / (w - 1).
double window_derivative(const std::vector<float>& signal, std::size_t t,
                         std::size_t w);

struct InterceptResult {
  SegmentBounds bounds;
  std::vector<float> valid;  // samples [t_tri, t_ter]
};

// First informative segment of the signal. Throws NoTriggerError when no
// window ever fires, NoTerminationError when a trigger is found but the
// signal never stabilizes before the end.
InterceptResult intercept(const std::vector<float>& signal,
                          const SegmentationParams& params);

// Every segment in the trace, in order; an absence of triggers is an empty
// list, not an error. Each search resumes just past the previous
// termination.
std::vector<InterceptResult> intercept_all(const EmTrace& trace,
                                           const SegmentationParams& params);

}  // namespace scanleak
