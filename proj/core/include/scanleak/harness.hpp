#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scanleak/device_model.hpp"
#include "scanleak/nn/model.hpp"

namespace scanleak {

// Labeled feature matrix for the classifiers: X is {N, ...}; y holds class
// indices into class_names.
struct Dataset {
  nn::Tensor x;
  std::vector<int> y;
  std::vector<std::string> class_names;

  std::size_t size() const { return y.size(); }
};

// Seeded train/test split. ratio is the training fraction, in (0, 1).
// Stratified mode splits each class separately so class balance carries
// over exactly when ratio * per-class count is integral.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double ratio,
                                          std::uint64_t seed,
                                          bool stratified = true);

// counts[i][j] = how often true class i was predicted as j.
std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& truth,
                                               const std::vector<int>& predicted,
                                               int n_classes);

// ---- key layouts ------------------------------------------------------------

// Key positions as 1-based electrode (column, row) pairs.
struct KeyLayout {
  std::vector<std::string> keys;                       // class order
  std::map<std::string, std::pair<int, int>> position; // key -> (col, row)

  void validate(const DeviceProfile& profile) const;  // on-screen, injective
};

// 3x4 digit pad (1..9 in three columns, 0 below the middle column).
KeyLayout digit_pad_layout(const DeviceProfile& profile);
// Three-row letter keyboard, 26 classes.
KeyLayout qwerty_layout(const DeviceProfile& profile);

// Same key set, positions permuted from the seed. Secure keypads redraw the
// permutation at every prompt, so attack evaluations draw one shuffle per
// observation.
KeyLayout shuffle_keyboard(const KeyLayout& layout, std::uint64_t seed);

// Profile variant whose per-frame TX activation order is drawn from the seed
// (the synthesizer consumes the flag, making the excitation slot of a fixed
// column vary frame to frame).
DeviceProfile randomize_scan_order(const DeviceProfile& profile,
                                   std::uint64_t seed);

// ---- sequence attacks -------------------------------------------------------

// The k most probable label sequences under per-position independence,
// best-first by product of probabilities. position_probs is {position ->
// class probability vector}; returns up to k sequences, most probable first.
std::vector<std::vector<int>> top_sequences(
    const std::vector<std::vector<double>>& position_probs, std::size_t k);

// Fraction of runs whose true sequence appears among the top k candidates.
double top_k_sequence_success(
    const std::vector<std::vector<std::vector<double>>>& runs_probs,
    const std::vector<std::vector<int>>& runs_truth, std::size_t k);

// ---- reports ----------------------------------------------------------------

struct Report {
  std::string task;
  std::vector<std::string> class_names;
  std::vector<std::vector<int>> confusion;
  double accuracy = 0.0;
  std::map<int, double> top_k;          // k -> sequence success rate
  std::map<std::string, std::string> metadata;  // seeds, scenario echo

  double per_class_accuracy(int cls) const;
};

// Writes report.json plus confusion.csv and topk.csv under dir. Emission is
// canonical (sorted keys, shortest float form): a fixed report produces
// byte-identical files.
void emit_report(const Report& report, const std::string& dir);
Report parse_report(const std::string& dir);

}  // namespace scanleak
