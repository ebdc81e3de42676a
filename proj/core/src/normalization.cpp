#include "scanleak/normalization.hpp"

#include <cmath>

namespace scanleak {

namespace {

template <typename T>
std::vector<double> resample_impl(const std::vector<T>& signal,
                                  std::size_t out_len) {
  if (signal.size() < 2)
    throw DomainError("resample: need at least 2 input samples, got " +
                      std::to_string(signal.size()));
  if (out_len < 2)
    throw DomainError("resample: need at least 2 output samples, got " +
                      std::to_string(out_len));

  const std::size_t n = signal.size();
  std::vector<double> out(out_len);
  // Map output index i to source position i * (n-1)/(out_len-1): both
  // endpoints land exactly on source endpoints, and out_len == n gives the
  // identity because every position is then an integer.
  const double step =
      static_cast<double>(n - 1) / static_cast<double>(out_len - 1);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= n - 1) {
      out[i] = static_cast<double>(signal[n - 1]);
      continue;
    }
    const double frac = pos - static_cast<double>(lo);
    out[i] = static_cast<double>(signal[lo]) * (1.0 - frac) +
             static_cast<double>(signal[lo + 1]) * frac;
  }
  return out;
}

}  // namespace

std::vector<double> resample(const std::vector<double>& signal,
                             std::size_t out_len) {
  return resample_impl(signal, out_len);
}

std::vector<double> resample(const std::vector<float>& signal,
                             std::size_t out_len) {
  return resample_impl(signal, out_len);
}

std::vector<double> zscore(const std::vector<double>& signal, double eps) {
  if (signal.empty()) throw DomainError("zscore: empty signal");
  const auto n = static_cast<double>(signal.size());
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : signal) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  if (sd <= eps)
    throw DegenerateSignalError("zscore: standard deviation " +
                                std::to_string(sd) + " at or below " +
                                std::to_string(eps));
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i)
    out[i] = (signal[i] - mean) / sd;
  return out;
}

std::vector<double> normalize_signal(const std::vector<float>& signal,
                                     std::size_t target_len, double eps) {
  return zscore(resample(signal, target_len), eps);
}

std::vector<double> normalize_signal(const std::vector<double>& signal,
                                     std::size_t target_len, double eps) {
  return zscore(resample(signal, target_len), eps);
}

}  // namespace scanleak
