#include "scanleak/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scanleak/errors.hpp"
#include "scanleak/rng.hpp"

namespace scanleak {

namespace {

// Copy the selected rows (by original index) into a fresh dataset.
Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  const std::size_t sample = data.x.numel() / data.x.shape[0];
  std::vector<std::size_t> shape = data.x.shape;
  shape[0] = rows.size();
  Dataset out;
  out.x = nn::Tensor(shape);
  out.y.reserve(rows.size());
  out.class_names = data.class_names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(
        data.x.data.begin() + static_cast<std::ptrdiff_t>(rows[i] * sample),
        sample, out.x.data.begin() + static_cast<std::ptrdiff_t>(i * sample));
    out.y.push_back(data.y[rows[i]]);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double ratio,
                                          std::uint64_t seed, bool stratified) {
  const std::size_t n = data.size();
  if (n == 0) throw DomainError("split: empty dataset");
  if (data.x.shape.empty() || data.x.shape[0] != n)
    throw DomainError("split: feature rows do not match label count");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw DomainError("split: ratio must be in (0, 1)");

  std::vector<std::size_t> train_rows, test_rows;
  if (stratified) {
    int max_label = 0;
    for (int label : data.y) {
      if (label < 0) throw DomainError("split: negative class label");
      max_label = std::max(max_label, label);
    }
    for (int cls = 0; cls <= max_label; ++cls) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (data.y[i] == cls) members.push_back(i);
      if (members.empty()) continue;
      Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(cls)));
      rng.shuffle(members);
      const auto n_train = static_cast<std::size_t>(
          std::llround(ratio * static_cast<double>(members.size())));
      for (std::size_t i = 0; i < members.size(); ++i)
        (i < n_train ? train_rows : test_rows).push_back(members[i]);
    }
  } else {
    Rng rng(derive_seed(seed, "split"));
    std::vector<std::size_t> order = rng.permutation(n);
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i)
      (i < n_train ? train_rows : test_rows).push_back(order[i]);
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {take_rows(data, train_rows), take_rows(data, test_rows)};
}

std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& truth,
                                               const std::vector<int>& predicted,
                                               int n_classes) {
  if (truth.size() != predicted.size())
    throw DomainError("confusion: truth/prediction count mismatch");
  if (n_classes < 1) throw DomainError("confusion: need at least one class");
  std::vector<std::vector<int>> counts(
      static_cast<std::size_t>(n_classes),
      std::vector<int>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 ||
        predicted[i] >= n_classes)
      throw DomainError("confusion: label out of range");
    ++counts[static_cast<std::size_t>(truth[i])]
            [static_cast<std::size_t>(predicted[i])];
  }
  return counts;
}

// ---- key layouts ------------------------------------------------------------

void KeyLayout::validate(const DeviceProfile& profile) const {
  if (keys.empty()) throw DomainError("layout: no keys");
  if (keys.size() != position.size())
    throw DomainError("layout: key list and position map disagree");
  std::set<std::pair<int, int>> cells;
  for (const std::string& key : keys) {
    auto it = position.find(key);
    if (it == position.end())
      throw DomainError("layout: key '" + key + "' has no position");
    const auto [col, row] = it->second;
    if (col < 1 || col > profile.scan.n_tx || row < 1 ||
        row > profile.scan.n_rx)
      throw DomainError("layout: key '" + key + "' is off the electrode grid");
    if (!cells.insert(it->second).second)
      throw DomainError("layout: two keys share an electrode cell");
  }
}

KeyLayout digit_pad_layout(const DeviceProfile& profile) {
  const int nx = profile.scan.n_tx, ny = profile.scan.n_rx;
  auto at = [](double f, int n) {
    return std::clamp(static_cast<int>(std::llround(f * n)), 1, n);
  };
  const int cols[3] = {at(0.25, nx), at(0.50, nx), at(0.75, nx)};
  const int rows[4] = {at(0.44, ny), at(0.57, ny), at(0.69, ny), at(0.82, ny)};
  KeyLayout layout;
  for (int d = 1; d <= 9; ++d) {
    const std::string key(1, static_cast<char>('0' + d));
    layout.keys.push_back(key);
    layout.position[key] = {cols[(d - 1) % 3], rows[(d - 1) / 3]};
  }
  layout.keys.push_back("0");
  layout.position["0"] = {cols[1], rows[3]};
  layout.validate(profile);
  return layout;
}

KeyLayout qwerty_layout(const DeviceProfile& profile) {
  const int nx = profile.scan.n_tx, ny = profile.scan.n_rx;
  static const char* kRows[3] = {"qwertyuiop", "asdfghjkl", "zxcvbnm"};
  const double row_frac[3] = {0.57, 0.69, 0.82};
  KeyLayout layout;
  for (int r = 0; r < 3; ++r) {
    const int row = std::clamp(
        static_cast<int>(std::llround(row_frac[r] * ny)), 1, ny);
    const std::string letters = kRows[r];
    for (std::size_t j = 0; j < letters.size(); ++j) {
      // Half-key stagger per row, ten key slots across the width.
      const double f = (static_cast<double>(j) + 0.5 + 0.5 * r) / 10.0;
      const int col = std::clamp(static_cast<int>(std::llround(f * nx)), 1, nx);
      const std::string key(1, letters[j]);
      layout.keys.push_back(key);
      layout.position[key] = {col, row};
    }
  }
  layout.validate(profile);
  return layout;
}

KeyLayout shuffle_keyboard(const KeyLayout& layout, std::uint64_t seed) {
  if (layout.keys.empty()) throw DomainError("shuffle: no keys");
  Rng rng(derive_seed(seed, "shuffle-keys"));
  const std::vector<std::size_t> perm = rng.permutation(layout.keys.size());
  KeyLayout out;
  out.keys = layout.keys;
  for (std::size_t i = 0; i < layout.keys.size(); ++i)
    out.position[layout.keys[i]] =
        layout.position.at(layout.keys[perm[i]]);
  return out;
}

DeviceProfile randomize_scan_order(const DeviceProfile& profile,
                                   std::uint64_t seed) {
  DeviceProfile out = profile;
  out.scan_order_randomized = true;
  out.scan_order_seed = seed;
  return out;
}

// ---- sequence attacks -------------------------------------------------------

namespace {

struct SequenceState {
  double score = 0.0;
  std::vector<std::size_t> ranks;  // per position, index into the sorted order
  std::size_t last = 0;            // rightmost position incremented so far

  // priority_queue keeps the largest element on top; ties prefer the
  // lexicographically smallest rank vector so results are deterministic.
  bool operator<(const SequenceState& other) const {
    if (score != other.score) return score < other.score;
    return ranks > other.ranks;
  }
};

}  // namespace

std::vector<std::vector<int>> top_sequences(
    const std::vector<std::vector<double>>& position_probs, std::size_t k) {
  if (position_probs.empty()) throw DomainError("top_sequences: no positions");
  for (const auto& probs : position_probs) {
    if (probs.empty())
      throw DomainError("top_sequences: empty probability vector");
    for (double p : probs)
      if (!(p >= 0.0) || !std::isfinite(p))
        throw DomainError("top_sequences: probabilities must be finite and >= 0");
  }
  std::vector<std::vector<int>> out;
  if (k == 0) return out;

  const std::size_t n_pos = position_probs.size();
  std::vector<std::vector<int>> sorted(n_pos);
  for (std::size_t p = 0; p < n_pos; ++p) {
    sorted[p].resize(position_probs[p].size());
    std::iota(sorted[p].begin(), sorted[p].end(), 0);
    std::stable_sort(sorted[p].begin(), sorted[p].end(), [&](int a, int b) {
      return position_probs[p][static_cast<std::size_t>(a)] >
             position_probs[p][static_cast<std::size_t>(b)];
    });
  }
  auto score_of = [&](const std::vector<std::size_t>& ranks) {
    double s = 1.0;
    for (std::size_t p = 0; p < n_pos; ++p)
      s *= position_probs[p][static_cast<std::size_t>(sorted[p][ranks[p]])];
    return s;
  };

  std::priority_queue<SequenceState> frontier;
  frontier.push({score_of(std::vector<std::size_t>(n_pos, 0)),
                 std::vector<std::size_t>(n_pos, 0), 0});
  while (!frontier.empty() && out.size() < k) {
    const SequenceState state = frontier.top();
    frontier.pop();
    std::vector<int> seq(n_pos);
    for (std::size_t p = 0; p < n_pos; ++p)
      seq[p] = sorted[p][state.ranks[p]];
    out.push_back(std::move(seq));
    // Children bump one position at or right of the last bumped one; every
    // rank vector is generated exactly once this way.
    for (std::size_t p = state.last; p < n_pos; ++p) {
      if (state.ranks[p] + 1 >= sorted[p].size()) continue;
      SequenceState child;
      child.ranks = state.ranks;
      ++child.ranks[p];
      child.score = score_of(child.ranks);
      child.last = p;
      frontier.push(std::move(child));
    }
  }
  return out;
}

double top_k_sequence_success(
    const std::vector<std::vector<std::vector<double>>>& runs_probs,
    const std::vector<std::vector<int>>& runs_truth, std::size_t k) {
  if (runs_probs.empty()) throw DomainError("top_k: no runs");
  if (runs_probs.size() != runs_truth.size())
    throw DomainError("top_k: runs/truth count mismatch");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < runs_probs.size(); ++r) {
    if (runs_truth[r].size() != runs_probs[r].size())
      throw DomainError("top_k: truth length does not match position count");
    const auto candidates = top_sequences(runs_probs[r], k);
    for (const auto& c : candidates) {
      if (c == runs_truth[r]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(runs_probs.size());
}

// ---- reports ----------------------------------------------------------------

double Report::per_class_accuracy(int cls) const {
  if (cls < 0 || static_cast<std::size_t>(cls) >= confusion.size())
    throw DomainError("report: class index out of range");
  const auto& row = confusion[static_cast<std::size_t>(cls)];
  const int total = std::accumulate(row.begin(), row.end(), 0);
  if (total == 0) return 0.0;
  return static_cast<double>(row[static_cast<std::size_t>(cls)]) /
         static_cast<double>(total);
}

namespace {

constexpr int kReportSchemaVersion = 1;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FileError(FileError::Kind::io, "cannot create " + path);
  os << text;
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

std::string csv_cell(const std::string& s) {
  // Class names here are short identifiers; commas would break the table.
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw DomainError("report: class name '" + s + "' not CSV-safe");
  return s;
}

}  // namespace

void emit_report(const Report& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw FileError(FileError::Kind::io, "cannot create directory " + dir);

  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["task"] = report.task;
  j["class_names"] = report.class_names;
  j["confusion"] = report.confusion;
  j["accuracy"] = report.accuracy;
  nlohmann::json top_k = nlohmann::json::object();
  for (const auto& [k, rate] : report.top_k) top_k[std::to_string(k)] = rate;
  j["top_k"] = top_k;
  j["metadata"] = report.metadata;
  write_text_file(dir + "/report.json", j.dump(2) + "\n");

  std::ostringstream confusion_csv;
  auto name_of = [&](std::size_t i) {
    return i < report.class_names.size() ? csv_cell(report.class_names[i])
                                         : std::to_string(i);
  };
  confusion_csv << "class";
  for (std::size_t i = 0; i < report.confusion.size(); ++i)
    confusion_csv << ',' << name_of(i);
  confusion_csv << '\n';
  for (std::size_t i = 0; i < report.confusion.size(); ++i) {
    confusion_csv << name_of(i);
    for (int c : report.confusion[i]) confusion_csv << ',' << c;
    confusion_csv << '\n';
  }
  write_text_file(dir + "/confusion.csv", confusion_csv.str());

  std::ostringstream topk_csv;
  topk_csv << "k,success_rate\n";
  for (const auto& [k, rate] : report.top_k) {
    topk_csv << k << ',';
    nlohmann::json rate_json = rate;  // shortest round-trip float form
    topk_csv << rate_json.dump() << '\n';
  }
  write_text_file(dir + "/topk.csv", topk_csv.str());
}

Report parse_report(const std::string& dir) {
  const std::string path = dir + "/report.json";
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError(FileError::Kind::io, "cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FileError(FileError::Kind::parse, path + ": " + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw FileError(FileError::Kind::version_mismatch,
                      path + ": unsupported report schema");
    Report report;
    report.task = j.at("task").get<std::string>();
    report.class_names = j.at("class_names").get<std::vector<std::string>>();
    report.confusion = j.at("confusion").get<std::vector<std::vector<int>>>();
    report.accuracy = j.at("accuracy").get<double>();
    for (const auto& [key, value] : j.at("top_k").items())
      report.top_k[std::stoi(key)] = value.get<double>();
    report.metadata =
        j.at("metadata").get<std::map<std::string, std::string>>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FileError(FileError::Kind::parse, path + ": " + e.what());
  }
}

}  // namespace scanleak
