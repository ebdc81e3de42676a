#pragma once

#include <cstddef>
#include <vector>

#include "scanleak/errors.hpp"

namespace scanleak {

// Linear-interpolation resample to exactly length out_len. Endpoints map to
// endpoints, interior positions are interpolated at uniform spacing.
// Resampling a signal to its own length is the identity.
std::vector<double> resample(const std::vector<double>& signal,
                             std::size_t out_len);
std::vector<double> resample(const std::vector<float>& signal,
                             std::size_t out_len);

// Zero-mean, unit-variance scaling (population statistics). Signals whose
// standard deviation is at or below eps cannot be scaled and throw
// DegenerateSignalError.
std::vector<double> zscore(const std::vector<double>& signal,
                           double eps = 1e-12);

// Fixed-length classifier input: resample to target_len, then z-score.
// target_len is normally ceil(sample_rate / f_touch) so one scan frame maps
// to one input vector.
std::vector<double> normalize_signal(const std::vector<float>& signal,
                                     std::size_t target_len,
                                     double eps = 1e-12);
std::vector<double> normalize_signal(const std::vector<double>& signal,
                                     std::size_t target_len,
                                     double eps = 1e-12);

}  // namespace scanleak
