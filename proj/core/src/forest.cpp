#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "scanleak/errors.hpp"
#include "scanleak/interaction.hpp"
#include "scanleak/rng.hpp"

namespace scanleak {

using namespace binio;

int DecisionTree::predict(const std::vector<double>& x) const {
  if (nodes.empty()) throw DomainError("tree: no nodes");
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(node.feature) >= x.size())
      throw DomainError("tree: sample has too few features");
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? node.left
            : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].leaf_class;
}

ForestPrediction Forest::predict(const std::vector<double>& x) const {
  if (trees_.empty()) throw DomainError("forest: no trees");
  ForestPrediction p;
  p.votes.assign(static_cast<std::size_t>(n_classes_), 0);
  for (const DecisionTree& tree : trees_) {
    const int c = tree.predict(x);
    if (c < 0 || c >= n_classes_)
      throw DomainError("forest: tree voted for class " + std::to_string(c));
    ++p.votes[static_cast<std::size_t>(c)];
  }
  p.label = 0;
  for (int c = 1; c < n_classes_; ++c)
    if (p.votes[static_cast<std::size_t>(c)] >
        p.votes[static_cast<std::size_t>(p.label)])
      p.label = c;
  return p;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<int>& y;
  int n_classes;
  std::size_t features_per_split;
  const ForestConfig& cfg;
  Rng& rng;
  std::vector<TreeNode> nodes;

  double gini(const std::vector<int>& counts, double total) const {
    double g = 1.0;
    for (int c : counts) {
      const double p = static_cast<double>(c) / total;
      g -= p * p;
    }
    return g;
  }

  int majority(const std::vector<int>& counts) const {
    int best = 0;
    for (int c = 1; c < n_classes; ++c)
      if (counts[static_cast<std::size_t>(c)] >
          counts[static_cast<std::size_t>(best)])
        best = c;
    return best;
  }

  // Builds the subtree over `rows` (indices into x) and returns its node id.
  int build(std::vector<std::size_t>& rows, int depth) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y[r])];
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    const bool pure =
        *std::max_element(counts.begin(), counts.end()) ==
        static_cast<int>(rows.size());
    if (pure || depth >= cfg.max_depth ||
        rows.size() < static_cast<std::size_t>(cfg.min_samples_split)) {
      nodes[static_cast<std::size_t>(node_id)].leaf_class = majority(counts);
      return node_id;
    }

    // Gini-optimal threshold over a random feature subset.
    const double total = static_cast<double>(rows.size());
    int best_feature = -1;
    double best_threshold = 0.0, best_score = gini(counts, total);
    std::vector<std::size_t> candidates = rng.permutation(x[0].size());
    candidates.resize(features_per_split);
    std::vector<std::size_t> sorted = rows;
    for (std::size_t f : candidates) {
      std::sort(sorted.begin(), sorted.end(),
                [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
      std::vector<int> left(static_cast<std::size_t>(n_classes), 0);
      std::vector<int> right = counts;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const int cls = y[sorted[i]];
        ++left[static_cast<std::size_t>(cls)];
        --right[static_cast<std::size_t>(cls)];
        const double lo = x[sorted[i]][f];
        const double hi = x[sorted[i + 1]][f];
        if (!(lo < hi)) continue;  // no threshold separates equal values
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        const double score =
            (nl * gini(left, nl) + nr * gini(right, nr)) / total;
        if (score < best_score - 1e-12) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (lo + hi);
        }
      }
    }

    if (best_feature < 0) {
      nodes[static_cast<std::size_t>(node_id)].leaf_class = majority(counts);
      return node_id;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (x[r][static_cast<std::size_t>(best_feature)] <= best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const int left_id = build(left_rows, depth + 1);
    const int right_id = build(right_rows, depth + 1);
    nodes[static_cast<std::size_t>(node_id)].left = left_id;
    nodes[static_cast<std::size_t>(node_id)].right = right_id;
    return node_id;
  }
};

}  // namespace

Forest train_forest(const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y, const ForestConfig& cfg) {
  if (x.empty()) throw DomainError("forest: empty training set");
  if (x.size() != y.size()) throw DomainError("forest: label count mismatch");
  const std::size_t dims = x[0].size();
  if (dims == 0) throw DomainError("forest: zero-width features");
  for (const auto& row : x)
    if (row.size() != dims)
      throw DomainError("forest: inconsistent feature widths");
  if (cfg.n_estimators < 1) throw DomainError("forest: need at least one tree");
  if (cfg.max_depth < 1) throw DomainError("forest: max_depth must be >= 1");
  if (cfg.min_samples_split < 2)
    throw DomainError("forest: min_samples_split must be >= 2");

  int n_classes = 0;
  for (int label : y) {
    if (label < 0) throw DomainError("forest: negative class label");
    n_classes = std::max(n_classes, label + 1);
  }
  bool single = true;
  for (int label : y)
    if (label != y[0]) {
      single = false;
      break;
    }
  if (single) throw DomainError("forest: training set holds a single class");

  // Canonical row order before any seeded draw: bootstrapping indexes into
  // this order, so permuting the caller's rows cannot change the model.
  std::vector<std::size_t> canon(x.size());
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const auto features_per_split = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(dims))));
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
  for (int t = 0; t < cfg.n_estimators; ++t) {
    Rng rng(derive_seed(cfg.seed, "tree", static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> sample(x.size());
    for (std::size_t& r : sample) r = canon[rng.uniform_index(x.size())];
    TreeBuilder builder{x, y, n_classes, features_per_split, cfg, rng, {}};
    builder.build(sample, 0);
    trees.push_back(DecisionTree{std::move(builder.nodes)});
  }
  return Forest(std::move(trees), n_classes);
}

double forest_accuracy(const Forest& forest,
                       const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y) {
  if (x.empty()) throw DomainError("forest: empty evaluation set");
  if (x.size() != y.size()) throw DomainError("forest: label count mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (forest.predict(x[i]).label == y[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(x.size());
}

namespace {
constexpr std::uint16_t kForestFormatVersion = 1;
}

void save_forest(const Forest& forest, const std::string& path) {
  auto os = open_for_write(path);
  write_bytes(os, "TFOR", 4);
  write_pod<std::uint16_t>(os, kForestFormatVersion);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(forest.n_classes()));
  write_pod<std::uint32_t>(os,
                           static_cast<std::uint32_t>(forest.trees().size()));
  for (const DecisionTree& tree : forest.trees()) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& node : tree.nodes) {
      write_pod<std::int32_t>(os, node.feature);
      write_pod<double>(os, node.threshold);
      write_pod<std::int32_t>(os, node.left);
      write_pod<std::int32_t>(os, node.right);
      write_pod<std::int32_t>(os, node.leaf_class);
    }
  }
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

Forest load_forest(const std::string& path) {
  auto is = open_for_read(path);
  check_magic(is, "TFOR", path);
  const auto version = read_pod<std::uint16_t>(is, "version");
  if (version != kForestFormatVersion)
    throw FileError(FileError::Kind::version_mismatch,
                    path + ": forest format version " +
                        std::to_string(version) + ", expected " +
                        std::to_string(kForestFormatVersion));
  const auto n_classes = read_pod<std::uint32_t>(is, "class count");
  const auto n_trees = read_pod<std::uint32_t>(is, "tree count");
  std::vector<DecisionTree> trees;
  trees.reserve(n_trees);
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const auto n_nodes = read_pod<std::uint32_t>(is, "node count");
    DecisionTree tree;
    tree.nodes.reserve(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      TreeNode node;
      node.feature = read_pod<std::int32_t>(is, "node feature");
      node.threshold = read_pod<double>(is, "node threshold");
      node.left = read_pod<std::int32_t>(is, "node left");
      node.right = read_pod<std::int32_t>(is, "node right");
      node.leaf_class = read_pod<std::int32_t>(is, "node class");
      tree.nodes.push_back(node);
    }
    trees.push_back(std::move(tree));
  }
  return Forest(std::move(trees), static_cast<int>(n_classes));
}

}  // namespace scanleak
