#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scanleak/segmentation.hpp"
#include "scanleak/trace.hpp"

namespace scanleak {

// Session-level behavioral statistics computed from intercepted frames.
// Frames closer together than gap_factor frame periods belong to one touch.
struct InteractionFeatures {
  double touch_count = 0.0;
  double mean_contact_duration = 0.0;     // seconds
  double std_contact_duration = 0.0;      // seconds
  double mean_inter_touch_interval = 0.0; // onset-to-onset, seconds
  double touch_rate = 0.0;                // touches per second
  double duty_cycle = 0.0;                // contact time / trace time

  std::array<double, 6> as_array() const {
    return {touch_count,      mean_contact_duration, std_contact_duration,
            mean_inter_touch_interval, touch_rate,   duty_cycle};
  }
  static const std::array<const char*, 6>& names();
};

// frame_period is 1/f_touch of the profile the trace came from. A trace with
// no intercepted frames yields all-zero features.
InteractionFeatures extract_interaction_features(
    const EmTrace& trace, const SegmentationParams& params,
    double frame_period, double gap_factor = 2.5);

// ---- random forest ----------------------------------------------------------

struct ForestConfig {
  int n_estimators = 100;
  std::uint64_t seed = 42;
  int max_depth = 12;
  int min_samples_split = 2;
};

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = -1;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int predict(const std::vector<double>& x) const;
};

struct ForestPrediction {
  int label = -1;
  std::vector<int> votes;  // per class, sums to n_estimators
};

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<DecisionTree> trees, int n_classes)
      : trees_(std::move(trees)), n_classes_(n_classes) {}

  ForestPrediction predict(const std::vector<double>& x) const;
  int n_classes() const { return n_classes_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
};

// Bagged CART ensemble: Gini impurity splits over ceil(sqrt(d)) candidate
// features per node, bootstrap sample per tree, majority vote. Rows are
// canonically sorted before bootstrapping, so permuting the training set
// changes nothing.
Forest train_forest(const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y, const ForestConfig& cfg = {});

double forest_accuracy(const Forest& forest,
                       const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y);

// Binary forest file; save(load(p)) is byte-identical to save(p).
void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace scanleak
