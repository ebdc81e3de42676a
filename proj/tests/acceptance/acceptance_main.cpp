// Release gate. Each criterion prints exactly one [PASS]/[FAIL] line with its
// measured numbers and elapsed time; the process exits nonzero if any fails.
// Thresholds are pinned here as constants next to the check they guard.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "scanleak/harness.hpp"
#include "scanleak/interaction.hpp"
#include "scanleak/nn/model.hpp"
#include "scanleak/nn/train.hpp"
#include "scanleak/normalization.hpp"
#include "scanleak/rng.hpp"
#include "scanleak/scenario.hpp"
#include "scanleak/segmentation.hpp"
#include "scanleak/trace_io.hpp"
#include "scanleak/trace_synth.hpp"
#include "scanleak/trajectory.hpp"

using namespace scanleak;
namespace fs = std::filesystem;

namespace {

// ---- scaffolding ------------------------------------------------------------

int g_failures = 0;

void run_criterion(int id, const std::string& name, double limit_seconds,
                   const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool pass = false;
  const auto start = std::chrono::steady_clock::now();
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail << " threw: " << e.what();
    pass = false;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed > limit_seconds) {
    pass = false;
    detail << " [over time budget]";
  }
  if (!pass) ++g_failures;
  std::printf("[%s] %2d %s —%s (%.1fs, limit %.0fs)\n",
              pass ? "PASS" : "FAIL", id, name.c_str(), detail.str().c_str(),
              elapsed, limit_seconds);
  std::fflush(stdout);
}

// Parallel index loop that surfaces the first worker exception.
template <typename Fn>
void parallel_for(long long n, Fn&& body) {
  std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(acceptance_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FileError(FileError::Kind::io, "cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// ---- criterion 1: physics against scratch oracles ---------------------------

// Hand-rolled complex arithmetic in extended precision: the production code
// goes through std::complex<double>, so agreement here is evidence about the
// formulas, not about a shared numeric kernel.
struct Cplx {
  long double re = 0.0L;
  long double im = 0.0L;
};

Cplx operator+(Cplx a, Cplx b) { return {a.re + b.re, a.im + b.im}; }
Cplx operator*(Cplx a, Cplx b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
Cplx operator/(Cplx a, Cplx b) {
  const long double d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
Cplx real_c(long double v) { return {v, 0.0L}; }
long double magnitude(Cplx a) { return std::hypot(a.re, a.im); }

// Reactance of capacitance c at angular frequency w: 1 / (j w c).
Cplx reactance(long double w, long double c) {
  return real_c(1.0L) / Cplx{0.0L, w * c};
}

long double omega(const CouplingCircuit& c) {
  return 2.0L * std::numbers::pi_v<long double> *
         static_cast<long double>(c.f_drive);
}

Cplx oracle_untouched(const CouplingCircuit& c) {
  const Cplx z_c0 = reactance(omega(c), c.c_0);
  return real_c(c.v_tx_amplitude) * real_c(c.r_tx) /
         (real_c(c.r_tx) + real_c(c.r_rx) + z_c0);
}

Cplx oracle_delta_z(const FingerState& finger, const CouplingCircuit& c) {
  const Cplx z_half = reactance(omega(c), 2.0L * c.c_0);
  const Cplx series = z_half + real_c(c.r_rx);
  const long double cf = finger.coupling_capacitance;
  if (cf == 0.0L) return series;
  const Cplx admittance = Cplx{0.0L, omega(c) * cf} + real_c(1.0L) / series;
  return real_c(1.0L) / admittance;
}

Cplx oracle_touched(const CouplingCircuit& c, const FingerState& finger) {
  const Cplx z_half = reactance(omega(c), 2.0L * c.c_0);
  return real_c(c.v_tx_amplitude) * real_c(c.r_tx) /
         (real_c(c.r_tx) + z_half + oracle_delta_z(finger, c));
}

long double rel_err(std::complex<double> got, Cplx want) {
  const Cplx diff{static_cast<long double>(got.real()) - want.re,
                  static_cast<long double>(got.imag()) - want.im};
  return magnitude(diff) / std::max(magnitude(want), 1e-30L);
}

// Counts elapsed excitation slots one by one instead of using closed-form
// index arithmetic.
double oracle_scan_delay(int x, const ScanTiming& t) {
  int elapsed_slots = 0;
  for (int col = 1; col < x; ++col) ++elapsed_slots;
  return static_cast<double>(elapsed_slots) / static_cast<double>(t.n_tx) *
             t.t_scan +
         t.delta_proc;
}

bool criterion_physics(std::ostringstream& out) {
  constexpr double kCouplingTol = 1e-10;  // relative, vs long double oracle
  Rng rng(11011);
  long double worst = 0.0L;
  for (int i = 0; i < 1000; ++i) {
    CouplingCircuit c;
    c.v_tx_amplitude = rng.uniform(0.5, 20.0);
    c.r_tx = rng.uniform(20.0, 5000.0);
    c.r_rx = rng.uniform(20.0, 5000.0);
    c.c_0 = rng.uniform(1e-13, 1e-10);
    c.f_drive = rng.uniform(5e4, 5e5);

    FingerState finger;
    const double mode = rng.uniform();
    if (mode < 0.25)
      finger = FingerState::absent();
    else if (mode < 0.5)
      finger = FingerState::at(rng.uniform(1e-4, 0.2), 0.0);  // zero area
    else
      finger = FingerState::at(rng.uniform(1e-5, 0.2),
                               rng.uniform(1e-5, 4e-4));

    worst = std::max(worst, rel_err(drive_voltage_untouched(c),
                                    oracle_untouched(c)));
    worst = std::max(worst, rel_err(coupling_impedance(finger, c),
                                    oracle_delta_z(finger, c)));
    worst = std::max(worst, rel_err(drive_voltage_touched(c, finger),
                                    oracle_touched(c, finger)));
  }

  int delay_mismatches = 0;
  for (const std::string& name : builtin_profile_names()) {
    const DeviceProfile p = builtin_profile(name);
    for (int x = 1; x <= p.scan.n_tx; ++x)
      if (scan_delay(x, p.scan) != oracle_scan_delay(x, p.scan))
        ++delay_mismatches;
  }

  out << " coupling max rel err " << static_cast<double>(worst)
      << " (tol " << kCouplingTol << "), scan delay mismatches "
      << delay_mismatches << "/" << builtin_profile_names().size()
      << " profiles";
  return worst < kCouplingTol && delay_mismatches == 0;
}

// ---- criterion 2: interception vs generator ground truth --------------------

bool criterion_segmentation(std::ostringstream& out) {
  constexpr int kTraces = 1000;
  constexpr int kFlatTraces = 200;
  constexpr double kMinHitRate = 0.99;  // bounds within ±w of truth
  const std::uint64_t m = 909;

  Scenario sc;
  sc.task = "pin";
  sc.snr = 10.0;
  sc.sample_rate = 20000.0;
  const PipelineContext ctx = make_context(sc, m);
  const KeyLayout pad = digit_pad_layout(ctx.profile);
  const auto w = static_cast<long long>(ctx.seg.w);

  std::vector<int> hit(kTraces, 0);
  parallel_for(kTraces, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(m, "c2-touch", i);
    Rng rng(derive_seed(seed, "pick"));
    const std::string& key = pad.keys[rng.uniform_index(pad.keys.size())];
    const auto [col, row] = pad.position.at(key);
    TouchEvent ev;
    ev.column = col;
    ev.row = row;
    ev.t_approach = rng.uniform(0.008, 0.015);
    ev.t_contact = rng.uniform(0.08, 0.14);
    ev.t_release = rng.uniform(0.015, 0.025);
    const EmTrace trace = synthesize_touch_trace(ctx.profile, ev, ctx.noise,
                                                 ctx.distance, seed, ctx.synth);
    const auto segs = intercept_all(trace, ctx.seg);
    if (segs.empty()) return;
    const auto t0 = static_cast<long long>(trace.meta_get_double("event0_t0"));
    const auto t1 = static_cast<long long>(trace.meta_get_double("event0_t1"));
    const auto got_t0 = static_cast<long long>(segs.front().bounds.t_tri);
    const auto got_t1 = static_cast<long long>(segs.back().bounds.t_ter);
    if (std::llabs(got_t0 - t0) <= w && std::llabs(got_t1 - t1) <= w)
      hit[i] = 1;
  });
  const int hits = std::accumulate(hit.begin(), hit.end(), 0);

  std::vector<int> no_trigger(kFlatTraces, 0);
  parallel_for(kFlatTraces, [&](std::size_t i) {
    EmTrace flat;
    flat.sample_rate = ctx.synth.sample_rate;
    flat.samples.assign(static_cast<std::size_t>(0.5 * flat.sample_rate), 0.0f);
    NoiseModel noise = ctx.noise;
    noise.seed = derive_seed(m, "c2-flat", i);
    const EmTrace noisy = add_noise(flat, noise);
    try {
      intercept(noisy.samples, ctx.seg);
    } catch (const NoTriggerError&) {
      no_trigger[i] = 1;
    }
  });
  const int flats = std::accumulate(no_trigger.begin(), no_trigger.end(), 0);

  const double rate = static_cast<double>(hits) / kTraces;
  out << " bounds within ±" << w << ": " << hits << "/" << kTraces << " ("
      << 100.0 * rate << "%, need ≥ " << 100.0 * kMinHitRate
      << "%), flat NoTrigger " << flats << "/" << kFlatTraces;
  return rate >= kMinHitRate && flats == kFlatTraces;
}

// ---- criterion 3: normalization invariants ----------------------------------

bool criterion_normalization(std::ostringstream& out) {
  constexpr int kCases = 10000;
  constexpr double kMomentTol = 1e-9;  // |mean|, |sd - 1|
  constexpr double kAffineTol = 1e-9;  // element-wise, positive-affine map

  double worst_mean = 0.0, worst_sd = 0.0, worst_affine = 0.0;
  int idempotence_breaks = 0, length_breaks = 0;
  Rng rng(30303);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform_int(0, 398));
    const std::size_t len =
        2 + static_cast<std::size_t>(rng.uniform_int(0, 398));
    const double mu = rng.uniform(-2.0, 2.0);
    const double sigma = rng.uniform(0.5, 3.0);
    std::vector<double> s(m);
    for (double& v : s) v = rng.normal(mu, sigma);

    const std::vector<double> n = normalize_signal(s, len);
    if (n.size() != len) ++length_breaks;

    double mean = 0.0;
    for (double v : n) mean += v;
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (double v : n) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(len));
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_sd = std::max(worst_sd, std::abs(sd - 1.0));

    const double a = rng.uniform(0.1, 8.0);
    const double b = rng.uniform(-4.0, 4.0);
    std::vector<double> mapped(m);
    for (std::size_t k = 0; k < m; ++k) mapped[k] = a * s[k] + b;
    const std::vector<double> n2 = normalize_signal(mapped, len);
    for (std::size_t k = 0; k < len; ++k)
      worst_affine = std::max(worst_affine, std::abs(n2[k] - n[k]));

    const std::vector<double> r = resample(s, len);
    if (resample(r, len) != r) ++idempotence_breaks;
  }

  out << " " << kCases << " cases: max |mean| " << worst_mean << ", max |sd-1| "
      << worst_sd << " (tol " << kMomentTol << "), max affine dev "
      << worst_affine << " (tol " << kAffineTol << "), idempotence breaks "
      << idempotence_breaks << ", length breaks " << length_breaks;
  return worst_mean < kMomentTol && worst_sd < kMomentTol &&
         worst_affine < kAffineTol && idempotence_breaks == 0 &&
         length_breaks == 0;
}

// ---- criterion 4: analytic gradients vs finite differences ------------------

nn::ModelSpec small_dense_spec() {
  nn::ModelSpec s;
  s.input_shape = {10};
  s.layers.push_back({"flatten", {}});
  s.layers.push_back({"dense", {{"in", 10.0}, {"out", 16.0}}});
  s.layers.push_back({"relu", {}});
  s.layers.push_back({"batchnorm1d",
                      {{"features", 16.0}, {"momentum", 0.1}, {"eps", 1e-5}}});
  s.layers.push_back({"dropout", {{"rate", 0.3}}});
  s.layers.push_back({"dense", {{"in", 16.0}, {"out", 3.0}}});
  s.layers.push_back({"softmax_output", {}});
  return s;
}

nn::ModelSpec small_conv_spec() {
  nn::ModelSpec s;
  s.input_shape = {1, 40};
  s.layers.push_back({"conv1d",
                      {{"in_ch", 1.0}, {"out_ch", 4.0}, {"kernel", 8.0},
                       {"stride", 4.0}, {"padding", 0.0}}});
  s.layers.push_back({"relu", {}});
  s.layers.push_back({"maxpool1d", {{"kernel", 2.0}, {"stride", 2.0}}});
  s.layers.push_back({"conv1d",
                      {{"in_ch", 4.0}, {"out_ch", 8.0}, {"kernel", 3.0},
                       {"stride", 1.0}, {"padding", 0.0}}});
  s.layers.push_back({"relu", {}});
  s.layers.push_back({"flatten", {}});
  s.layers.push_back({"dense", {{"in", 16.0}, {"out", 3.0}}});
  s.layers.push_back({"softmax_output", {}});
  return s;
}

nn::ModelSpec small_attention_spec() {
  nn::ModelSpec s;
  s.input_shape = {4, 8};
  s.layers.push_back({"encoder_block",
                      {{"d_model", 8.0}, {"d_ff", 16.0}, {"n_heads", 2.0}}});
  s.layers.push_back({"attention_pool", {{"d_model", 8.0}}});
  s.layers.push_back({"dense", {{"in", 8.0}, {"out", 3.0}}});
  s.layers.push_back({"softmax_output", {}});
  return s;
}

bool criterion_gradients(std::ostringstream& out) {
  constexpr double kDenseConvTol = 1e-4;
  constexpr double kAttentionTol = 1e-3;

  auto filled = [](const std::vector<std::size_t>& shape, std::uint64_t seed) {
    nn::Tensor x(shape);
    Rng rng(seed);
    for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
    return x;
  };

  nn::Model dense(small_dense_spec(), 41);
  const double e_dense =
      nn::gradient_check(dense, filled({6, 10}, 141), {0, 1, 2, 0, 1, 2});

  nn::Model conv(small_conv_spec(), 42);
  const double e_conv =
      nn::gradient_check(conv, filled({3, 1, 40}, 142), {0, 2, 1});

  nn::Model attn(small_attention_spec(), 43);
  const double e_attn =
      nn::gradient_check(attn, filled({3, 4, 8}, 143), {0, 1, 2});

  out << " max rel err: dense/batchnorm " << e_dense << ", conv/pool " << e_conv
      << " (tol " << kDenseConvTol << "), encoder/attention " << e_attn
      << " (tol " << kAttentionTol << ")";
  return e_dense < kDenseConvTol && e_conv < kDenseConvTol &&
         e_attn < kAttentionTol;
}

// ---- criterion 5: closed-loop PIN attack ------------------------------------

// Column separation rides on excitation timing; row separation on the
// receiver-side amplitude spread, boosted here so rows stay separable at the
// criterion's SNR.
Scenario pin_attack_scenario() {
  Scenario sc;
  sc.task = "pin";
  sc.model = "mlp";
  sc.sample_rate = 20000.0;
  sc.snr = 10.0;
  sc.distance = 0.05;
  sc.rx_leak_gain = 0.5;
  sc.train_per_class = 960;   // 9600 training observations
  sc.test_per_class = 240;    // 2400 held-out observations
  sc.epochs = 12;
  return sc;
}

bool criterion_pin_attack(std::ostringstream& out) {
  constexpr double kMinAccuracy = 0.95;
  const std::uint64_t m = 505;
  const Scenario sc = pin_attack_scenario();

  const PipelineContext ctx = make_context(sc, m);
  const KeyLayout pad = digit_pad_layout(ctx.profile);
  const Dataset train_set = make_key_dataset(ctx, pad, sc.train_per_class,
                                             derive_seed(m, "train-data"));
  const Dataset test_set = make_key_dataset(ctx, pad, sc.test_per_class,
                                            derive_seed(m, "test-data"));
  const nn::Model model =
      train_scenario_model(sc, train_set, derive_seed(m, "model"));

  const std::vector<int> preds = model.predict_labels(test_set.x);
  const auto confusion =
      confusion_matrix(test_set.y, preds, static_cast<int>(pad.keys.size()));
  std::size_t correct = 0;
  for (std::size_t c = 0; c < confusion.size(); ++c)
    correct += static_cast<std::size_t>(confusion[c][c]);
  const double acc = static_cast<double>(correct) /
                     static_cast<double>(test_set.size());

  // Errors between keys of one pad column vs everything else.
  int same_col = 0, cross_col = 0;
  for (std::size_t i = 0; i < pad.keys.size(); ++i)
    for (std::size_t j = 0; j < pad.keys.size(); ++j) {
      if (i == j) continue;
      const bool same =
          pad.position.at(pad.keys[i]).first == pad.position.at(pad.keys[j]).first;
      (same ? same_col : cross_col) += confusion[i][j];
    }

  out << " held-out accuracy " << 100.0 * acc << "% (need ≥ "
      << 100.0 * kMinAccuracy << "%), confusions same-column " << same_col
      << " vs cross-column " << cross_col;
  return acc >= kMinAccuracy && same_col > cross_col;
}

// ---- criterion 6: vertical leakage ablation ---------------------------------

bool criterion_leak_ablation(std::ostringstream& out) {
  constexpr double kChance = 1.0 / 3.0;
  constexpr double kChanceBand = 0.10;   // ± around chance when the leak is off
  constexpr double kMinLeakAccuracy = 0.90;
  const std::uint64_t m = 606;

  Scenario sc;
  sc.task = "pin";
  sc.model = "mlp";
  sc.sample_rate = 20000.0;
  sc.snr = 0.0;  // noiseless bench isolates the leak itself
  sc.train_per_class = 120;
  sc.test_per_class = 100;
  sc.epochs = 12;

  // The same-column triple: identical excitation slot, rows apart.
  auto triple_accuracy = [&](double gain) {
    Scenario cfg = sc;
    cfg.rx_leak_gain = gain;
    const PipelineContext ctx = make_context(cfg, m);
    const KeyLayout pad = digit_pad_layout(ctx.profile);
    KeyLayout triple;
    for (const std::string key : {"1", "4", "7"}) {
      triple.keys.push_back(key);
      triple.position[key] = pad.position.at(key);
    }
    const Dataset train_set = make_key_dataset(
        ctx, triple, cfg.train_per_class, derive_seed(m, "train-data"));
    const Dataset test_set = make_key_dataset(
        ctx, triple, cfg.test_per_class, derive_seed(m, "test-data"));
    const nn::Model model =
        train_scenario_model(cfg, train_set, derive_seed(m, "model"));
    return nn::accuracy(model, test_set.x, test_set.y);
  };

  const double acc_off = triple_accuracy(0.0);
  const double acc_on = triple_accuracy(0.05);

  out << " {1,4,7} accuracy: leak off " << 100.0 * acc_off << "% (chance 33% ± "
      << 100.0 * kChanceBand << "), leak 0.05 " << 100.0 * acc_on
      << "% (need ≥ " << 100.0 * kMinLeakAccuracy << "%)";
  return std::abs(acc_off - kChance) <= kChanceBand &&
         acc_on >= kMinLeakAccuracy;
}

// ---- criterion 7: countermeasures -------------------------------------------

double countermeasure_accuracy(const std::string& which, double rx_leak_gain,
                               std::uint64_t m) {
  Scenario sc = pin_attack_scenario();
  sc.countermeasure = which;
  sc.rx_leak_gain = rx_leak_gain;
  // The attack stage is irrelevant here; one token run keeps the report cheap.
  sc.seq_len = 1;
  sc.runs = 1;
  sc.k_list = {1};
  return run_end_to_end(sc, m).accuracy;
}

bool criterion_shuffle(std::ostringstream& out) {
  constexpr double kChance = 0.10;
  constexpr double kBand = 0.05;
  const double acc = countermeasure_accuracy("shuffle", 0.5, 707);
  out << " shuffled-keypad accuracy " << 100.0 * acc << "% (chance 10% ± "
      << 100.0 * kBand << ")";
  return std::abs(acc - kChance) <= kBand;
}

bool criterion_scanrand(std::ostringstream& out) {
  constexpr double kChance = 0.10;
  constexpr double kBand = 0.05;
  // Scan-order randomization scrambles the column timing; the row-amplitude
  // channel is separately disabled so nothing is left to learn.
  const double acc = countermeasure_accuracy("scanrand", 0.0, 717);
  out << " randomized-scan accuracy " << 100.0 * acc << "% (chance 10% ± "
      << 100.0 * kBand << ")";
  return std::abs(acc - kChance) <= kBand;
}

// ---- criterion 8: sequence attacks end to end -------------------------------

bool monotone_topk(const Report& r) {
  double prev = -1.0;
  for (const auto& [k, rate] : r.top_k) {  // std::map: ascending k
    if (rate + 1e-12 < prev) return false;
    prev = rate;
  }
  return true;
}

bool criterion_end_to_end(std::ostringstream& out) {
  const std::uint64_t m_clean = 808, m_noisy = 809;

  Scenario clean = pin_attack_scenario();
  clean.snr = 0.0;
  clean.train_per_class = 200;
  clean.test_per_class = 50;
  clean.seq_len = 4;
  clean.runs = 300;
  clean.k_list = {1, 3, 5};
  const Report rep_clean = run_end_to_end(clean, m_clean);

  Scenario noisy = pin_attack_scenario();
  noisy.train_per_class = 400;
  noisy.test_per_class = 100;
  noisy.runs = 300;
  noisy.k_list = {1, 3, 5};
  noisy.seq_len = 4;
  const Report rep_len4 = run_end_to_end(noisy, m_noisy);
  noisy.seq_len = 10;
  const Report rep_len10 = run_end_to_end(noisy, m_noisy);

  const double t5_clean = rep_clean.top_k.at(5);
  const double t1_len4 = rep_len4.top_k.at(1);
  const double t1_len10 = rep_len10.top_k.at(1);
  const bool mono = monotone_topk(rep_clean) && monotone_topk(rep_len4) &&
                    monotone_topk(rep_len10);

  out << " zero-noise 4-digit T-5 " << 100.0 * t5_clean
      << "% over 300 runs (need 100%), T-1/T-3/T-5 monotone "
      << (mono ? "yes" : "NO") << ", fixed-noise T-1 len10 "
      << 100.0 * t1_len10 << "% ≤ len4 " << 100.0 * t1_len4 << "%";
  return t5_clean == 1.0 && mono && t1_len10 <= t1_len4;
}

// ---- criterion 9: trajectory recovery ---------------------------------------

bool criterion_trajectory(std::ostringstream& out) {
  constexpr int kPaths = 100;
  constexpr double kMinZoneAccuracy = 0.94;  // per-frame, aggregate
  constexpr double kMinJaccard = 0.7;
  constexpr int kMinGoodPaths = 90;
  constexpr int kCanvas = 96;
  constexpr int kStrokePx = 5;
  const std::uint64_t m = 910;

  Scenario sc;
  sc.task = "zones";
  sc.model = "mlp";
  sc.sample_rate = 20000.0;
  sc.snr = 1000.0;  // low noise
  sc.rx_leak_gain = 0.5;
  sc.train_per_class = 25;  // per zone: 12000 observations over the grid
  sc.epochs = 15;

  const PipelineContext ctx = make_context(sc, m);
  GridSpec grid;
  grid.cols = sc.grid_cols;
  grid.rows = sc.grid_rows;
  grid.screen_w = ctx.profile.screen_w;
  grid.screen_h = ctx.profile.screen_h;

  const Dataset train_set =
      make_zone_dataset(ctx, grid, sc.train_per_class, derive_seed(m, "zones"));
  const nn::Model model =
      train_scenario_model(sc, train_set, derive_seed(m, "model"));

  const std::string charset = recognizable_characters();
  const double height =
      std::min(0.6 * grid.screen_h, 0.8 * grid.screen_w / 0.7);
  const int height_px = static_cast<int>(
      std::lround(kCanvas * grid.screen_h / grid.screen_w));
  const double gap_seconds = 1.8 * ctx.profile.scan.t_scan;

  std::vector<long long> frames_total(kPaths, 0), frames_hit(kPaths, 0);
  std::vector<int> jaccard_ok(kPaths, 0);
  parallel_for(kPaths, [&](std::size_t run) {
    Rng rng(derive_seed(m, "char", run));
    const char c = charset[rng.uniform_index(charset.size())];
    const Trajectory path = character_trajectory(
        c, grid.screen_w / 2, grid.screen_h / 2, height, 0.01);
    const EmTrace trace = synthesize_handwriting(
        ctx.profile, path, sc.speed, ctx.noise, ctx.distance,
        derive_seed(m, "trace", run), ctx.synth);

    // Frame-by-frame zone classification against the generator's record.
    const auto segs = intercept_all(trace, ctx.seg);
    if (segs.empty()) return;
    nn::Tensor batch({segs.size(), ctx.input_len});
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto row = normalize_signal(segs[i].valid, ctx.input_len);
      std::copy(row.begin(), row.end(),
                batch.data.begin() + static_cast<std::ptrdiff_t>(i * ctx.input_len));
    }
    const std::vector<int> zones = model.predict_labels(batch);

    const auto n_truth =
        static_cast<std::size_t>(trace.meta_get_double("frame_count"));
    std::vector<long long> truth_t0(n_truth);
    std::vector<int> truth_zone(n_truth);
    for (std::size_t f = 0; f < n_truth; ++f) {
      const std::string tag = "frame" + std::to_string(f);
      truth_t0[f] = static_cast<long long>(trace.meta_get_double(tag + "_t0"));
      truth_zone[f] = static_cast<int>(trace.meta_get_double(tag + "_zone"));
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto t = static_cast<long long>(segs[i].bounds.t_tri);
      std::size_t best = 0;
      for (std::size_t f = 1; f < n_truth; ++f)
        if (std::llabs(truth_t0[f] - t) < std::llabs(truth_t0[best] - t))
          best = f;
      ++frames_total[run];
      if (zones[i] == truth_zone[best]) ++frames_hit[run];
    }

    // Shape overlap of the recovered pen path against the drawn one.
    Trajectory recovered;
    recovered.points.reserve(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto [zx, zy] = zone_center(zones[i], grid);
      recovered.points.push_back(
          {static_cast<double>(segs[i].bounds.t_tri) / trace.sample_rate, zx, zy});
    }
    const Trajectory smoothed =
        smooth(splice(split_at_gaps(recovered, gap_seconds)), 11);
    const RasterMask truth_mask = rasterize(path, kCanvas, height_px, kStrokePx,
                                            grid.screen_w, grid.screen_h);
    const RasterMask rec_mask = rasterize(smoothed, kCanvas, height_px,
                                          kStrokePx, grid.screen_w, grid.screen_h);
    if (jaccard(truth_mask, rec_mask) >= kMinJaccard) jaccard_ok[run] = 1;
  });

  const long long total = std::accumulate(frames_total.begin(),
                                          frames_total.end(), 0LL);
  const long long hits = std::accumulate(frames_hit.begin(),
                                         frames_hit.end(), 0LL);
  const int good_paths = std::accumulate(jaccard_ok.begin(), jaccard_ok.end(), 0);
  const double zone_acc =
      total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;

  // The overlap metric itself against brute-force set counting.
  Rng mask_rng(derive_seed(m, "masks"));
  int metric_breaks = 0;
  for (int i = 0; i < 1000; ++i) {
    RasterMask a = RasterMask::blank(24, 16);
    RasterMask b = RasterMask::blank(24, 16);
    const double da = mask_rng.uniform(0.0, 0.6);
    const double db = mask_rng.uniform(0.0, 0.6);
    for (auto& px : a.pixels) px = mask_rng.uniform() < da ? 1 : 0;
    for (auto& px : b.pixels) px = mask_rng.uniform() < db ? 1 : 0;
    std::size_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < a.pixels.size(); ++k) {
      if (a.pixels[k] && b.pixels[k]) ++inter;
      if (a.pixels[k] || b.pixels[k]) ++uni;
    }
    const double want =
        uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    if (std::abs(jaccard(a, b) - want) > 1e-12) ++metric_breaks;
  }

  out << " per-frame zone accuracy " << 100.0 * zone_acc << "% over " << total
      << " frames (need ≥ " << 100.0 * kMinZoneAccuracy << "%), Jaccard ≥ "
      << kMinJaccard << " on " << good_paths << "/" << kPaths
      << " paths (need ≥ " << kMinGoodPaths << "), metric breaks "
      << metric_breaks << "/1000";
  return zone_acc >= kMinZoneAccuracy && good_paths >= kMinGoodPaths &&
         metric_breaks == 0;
}

// ---- criterion 10: interaction classification -------------------------------

bool criterion_interaction(std::ostringstream& out) {
  constexpr int kPerClass = 500;
  constexpr double kMinAccuracy = 0.90;
  const std::uint64_t m = 1010;

  Scenario sc;
  sc.task = "interaction";
  sc.sample_rate = 4000.0;  // behavioral statistics survive a coarse probe
  sc.snr = 10.0;
  const PipelineContext ctx = make_context(sc, m);

  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  make_interaction_data(ctx, kPerClass, derive_seed(m, "sessions"), &features,
                        &labels, &class_names);

  // Stratified 80:20 split.
  std::vector<std::vector<double>> train_x, test_x;
  std::vector<int> train_y, test_y;
  Rng split_rng(derive_seed(m, "split"));
  for (int cls = 0; cls < 3; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    const std::vector<std::size_t> order = split_rng.permutation(idx.size());
    const std::size_t n_train = idx.size() * 4 / 5;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t row = idx[order[k]];
      if (k < n_train) {
        train_x.push_back(features[row]);
        train_y.push_back(cls);
      } else {
        test_x.push_back(features[row]);
        test_y.push_back(cls);
      }
    }
  }

  const Forest forest = train_forest(train_x, train_y, ForestConfig{});
  const double acc = forest_accuracy(forest, test_x, test_y);

  out << " " << class_names.size() << "-class forest ("
      << forest.trees().size() << " trees) held-out accuracy " << 100.0 * acc
      << "% on " << test_y.size() << " sessions (need ≥ "
      << 100.0 * kMinAccuracy << "%)";
  return acc >= kMinAccuracy && class_names.size() == 3;
}

// ---- criterion 11: determinism and formats ----------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SCANLEAK_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

bool criterion_determinism(std::ostringstream& out) {
  TempDir dir("scanleak_acceptance_det");
  int break_count = 0;
  std::string first_break;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      ++break_count;
      if (first_break.empty()) first_break = what;
    }
  };

  // Library formats: save(load(save(x))) must be byte-identical.
  {
    EmTrace t;
    t.sample_rate = 9000.0;
    t.profile_name = "iphone_x";
    Rng rng(61);
    for (int i = 0; i < 500; ++i)
      t.samples.push_back(static_cast<float>(rng.normal(0.0, 1.0)));
    t.meta_set("label", "7");
    t.meta_set_double("event0_t0", 55.0);
    save_trace(t, dir.file("a.tesl"));
    save_trace(load_trace(dir.file("a.tesl")), dir.file("b.tesl"));
    expect(slurp(dir.file("a.tesl")) == slurp(dir.file("b.tesl")), "trace");
  }
  {
    Matrix mtx;
    mtx.rows = 5;
    mtx.cols = 9;
    Rng rng(62);
    for (int i = 0; i < 45; ++i)
      mtx.values.push_back(static_cast<float>(rng.normal(0.0, 1.0)));
    save_matrix(mtx, dir.file("a.tmat"));
    save_matrix(load_matrix(dir.file("a.tmat")), dir.file("b.tmat"));
    expect(slurp(dir.file("a.tmat")) == slurp(dir.file("b.tmat")), "matrix");
  }
  {
    std::vector<ManifestEntry> entries(3);
    for (int i = 0; i < 3; ++i) {
      entries[i].path = "t" + std::to_string(i) + ".tesl";
      entries[i].label = std::to_string(i);
      entries[i].session_kind = "keyboard_input";
      entries[i].seed = 100 + static_cast<std::uint64_t>(i);
      entries[i].distance = 0.05;
    }
    save_manifest(entries, dir.file("a.jsonl"));
    save_manifest(load_manifest(dir.file("a.jsonl")), dir.file("b.jsonl"));
    expect(slurp(dir.file("a.jsonl")) == slurp(dir.file("b.jsonl")), "manifest");
  }
  {
    DeviceProfile p = builtin_profile("samsung_s10");
    p.rx_leak_gain = 0.037;
    save_profile(p, dir.file("a.profile"));
    save_profile(load_profile(dir.file("a.profile")), dir.file("b.profile"));
    expect(slurp(dir.file("a.profile")) == slurp(dir.file("b.profile")),
           "profile");
  }
  {
    nn::Model model(nn::mlp_spec(16, 3), 63);
    nn::save_model(model, dir.file("a.tmdl"));
    nn::Model back = nn::load_model(dir.file("a.tmdl"));
    nn::save_model(back, dir.file("b.tmdl"));
    expect(slurp(dir.file("a.tmdl")) == slurp(dir.file("b.tmdl")), "model");
  }
  {
    Rng rng(64);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      const int cls = i % 2;
      x.push_back({rng.normal(cls * 3.0, 0.5), rng.normal(-cls * 2.0, 0.5)});
      y.push_back(cls);
    }
    ForestConfig cfg;
    cfg.n_estimators = 10;
    const Forest forest = train_forest(x, y, cfg);
    save_forest(forest, dir.file("a.tfor"));
    save_forest(load_forest(dir.file("a.tfor")), dir.file("b.tfor"));
    expect(slurp(dir.file("a.tfor")) == slurp(dir.file("b.tfor")), "forest");
  }
  {
    Report r;
    r.task = "pin";
    r.class_names = {"0", "1"};
    r.confusion = {{4, 1}, {0, 5}};
    r.accuracy = 0.9;
    r.top_k = {{1, 0.9}, {3, 1.0}};
    r.metadata = {{"seed", "7"}};
    fs::create_directories(dir.file("rep_a"));
    fs::create_directories(dir.file("rep_b"));
    emit_report(r, dir.file("rep_a"));
    emit_report(parse_report(dir.file("rep_a")), dir.file("rep_b"));
    expect(slurp(dir.file("rep_a") + "/report.json") ==
               slurp(dir.file("rep_b") + "/report.json"),
           "report");
  }

  // Command determinism: same invocation, byte-identical outputs.
  {
    const std::string synth =
        "synth --task pin --count 1 --sample-rate 8000 --snr 20 --seed 5 --out ";
    expect(run_cli(synth + dir.file("s1") + " > /dev/null") == 0, "synth run");
    expect(run_cli(synth + dir.file("s2") + " > /dev/null") == 0, "synth rerun");
    expect(slurp(dir.file("s1/manifest.jsonl")) ==
               slurp(dir.file("s2/manifest.jsonl")),
           "synth manifest bytes");
    expect(slurp(dir.file("s1/pin_8_0.tesl")) ==
               slurp(dir.file("s2/pin_8_0.tesl")),
           "synth trace bytes");

    std::ofstream sc(dir.file("tiny.scenario"));
    sc << "task = pin\nsample_rate = 8000\nsnr = 25\ntrain_per_class = 2\n"
       << "test_per_class = 1\nepochs = 1\nbatch_size = 8\nseq_len = 2\n"
       << "runs = 2\nk_list = 1\n";
    sc.close();
    const std::string e2e = "e2e --scenario " + dir.file("tiny.scenario") +
                            " --seed 9 --out ";
    expect(run_cli(e2e + dir.file("r1") + " > /dev/null") == 0, "e2e run");
    expect(run_cli(e2e + dir.file("r2") + " > /dev/null") == 0, "e2e rerun");
    for (const char* f : {"report.json", "confusion.csv", "topk.csv"})
      expect(slurp(dir.file("r1") + "/" + f) == slurp(dir.file("r2") + "/" + f),
             std::string("e2e ") + f);
  }

  if (break_count == 0)
    out << " trace/matrix/manifest/profile/model/forest/report round-trips and"
           " synth+e2e reruns all byte-identical";
  else
    out << " " << break_count << " breaks, first: " << first_break;
  return break_count == 0;
}

}  // namespace

int main() {
  std::printf("scanleak acceptance gate\n");
  run_criterion(1, "physics against scratch oracles", 10, criterion_physics);
  run_criterion(2, "interception vs ground truth", 60, criterion_segmentation);
  run_criterion(3, "normalization invariants", 30, criterion_normalization);
  run_criterion(4, "gradients vs finite differences", 120, criterion_gradients);
  run_criterion(5, "closed-loop PIN attack", 300, criterion_pin_attack);
  run_criterion(6, "vertical leakage ablation", 300, criterion_leak_ablation);
  run_criterion(7, "shuffle countermeasure", 300, criterion_shuffle);
  run_criterion(7, "scan-order countermeasure", 300, criterion_scanrand);
  run_criterion(8, "sequence attacks end to end", 600, criterion_end_to_end);
  run_criterion(9, "trajectory recovery", 300, criterion_trajectory);
  run_criterion(10, "interaction classification", 120, criterion_interaction);
  run_criterion(11, "determinism and formats", 60, criterion_determinism);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
