#include "scanleak/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/nn/model.hpp"
#include "scanleak/normalization.hpp"
#include "scanleak/rng.hpp"
#include "scanleak/segmentation.hpp"

namespace scanleak {

// ---- scenario text ----------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& what) {
  throw DomainError(origin + ":" + std::to_string(line) + ": " + what);
}

double parse_num(const std::string& value, const std::string& origin,
                 int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size())
      parse_fail(origin, line, "trailing junk after number '" + value + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(origin, line, "expected a number, got '" + value + "'");
  }
}

int parse_int(const std::string& value, const std::string& origin, int line) {
  const double v = parse_num(value, origin, line);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    parse_fail(origin, line, "expected an integer, got '" + value + "'");
  return static_cast<int>(v);
}

std::vector<int> parse_int_list(const std::string& value,
                                const std::string& origin, int line) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) parse_fail(origin, line, "empty list element");
    out.push_back(parse_int(item, origin, line));
  }
  if (out.empty()) parse_fail(origin, line, "empty list");
  return out;
}

std::string num_str(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void Scenario::validate() const {
  static const std::set<std::string> kTasks = {
      "pin", "keyboard", "zones", "handwriting", "interaction", "apps"};
  static const std::set<std::string> kModels = {"mlp", "cnn", "transformer"};
  static const std::set<std::string> kCounter = {"none", "shuffle", "scanrand"};
  if (!kTasks.count(task)) throw DomainError("scenario: unknown task '" + task + "'");
  if (!kModels.count(model))
    throw DomainError("scenario: unknown model '" + model + "'");
  if (!kCounter.count(countermeasure))
    throw DomainError("scenario: unknown countermeasure '" + countermeasure + "'");
  if (countermeasure == "shuffle" && task != "pin" && task != "keyboard")
    throw DomainError("scenario: shuffle only applies to key-entry tasks");
  if (countermeasure == "scanrand" && (task == "interaction" || task == "apps"))
    throw DomainError("scenario: scanrand does not apply to task '" + task + "'");
  if (!(sample_rate > 0.0)) throw DomainError("scenario: sample_rate must be > 0");
  if (snr < 0.0) throw DomainError("scenario: snr must be >= 0");
  if (!(distance > 0.0)) throw DomainError("scenario: distance must be > 0");
  if (rx_leak_gain > 1.0)
    throw DomainError("scenario: rx_leak_gain must be <= 1");
  if (train_per_class < 1 || test_per_class < 1)
    throw DomainError("scenario: per-class sample counts must be >= 1");
  if (epochs < 1) throw DomainError("scenario: epochs must be >= 1");
  if (!(lr > 0.0)) throw DomainError("scenario: lr must be > 0");
  if (batch_size < 1) throw DomainError("scenario: batch_size must be >= 1");
  if (seq_len < 1) throw DomainError("scenario: seq_len must be >= 1");
  if (runs < 1) throw DomainError("scenario: runs must be >= 1");
  if (k_list.empty()) throw DomainError("scenario: k_list must not be empty");
  for (int k : k_list)
    if (k < 1) throw DomainError("scenario: every k must be >= 1");
  if (grid_cols < 1 || grid_rows < 1)
    throw DomainError("scenario: grid dimensions must be >= 1");
  if (!(speed > 0.0)) throw DomainError("scenario: speed must be > 0");
  if (smooth_window < 1 || smooth_window % 2 == 0)
    throw DomainError("scenario: smooth_window must be odd and >= 1");
  if (stroke_px < 1) throw DomainError("scenario: stroke_px must be >= 1");
  if (session_seconds < 10.0)
    throw DomainError("scenario: session_seconds must be >= 10");
  if (touches_per_session < 1)
    throw DomainError("scenario: touches_per_session must be >= 1");
  const std::string known = recognizable_characters();
  for (char c : chars)
    if (known.find(c) == std::string::npos)
      throw DomainError(std::string("scenario: no glyph for character '") + c +
                        "'");
}

Scenario scenario_from_string(const std::string& text,
                              const std::string& origin) {
  Scenario sc;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(origin, line_no, "empty key");

    if (key == "task") sc.task = value;
    else if (key == "profile") sc.profile = value;
    else if (key == "model") sc.model = value;
    else if (key == "countermeasure") sc.countermeasure = value;
    else if (key == "sample_rate") sc.sample_rate = parse_num(value, origin, line_no);
    else if (key == "snr") sc.snr = parse_num(value, origin, line_no);
    else if (key == "distance") sc.distance = parse_num(value, origin, line_no);
    else if (key == "rx_leak_gain") sc.rx_leak_gain = parse_num(value, origin, line_no);
    else if (key == "train_per_class") sc.train_per_class = parse_int(value, origin, line_no);
    else if (key == "test_per_class") sc.test_per_class = parse_int(value, origin, line_no);
    else if (key == "epochs") sc.epochs = parse_int(value, origin, line_no);
    else if (key == "lr") sc.lr = parse_num(value, origin, line_no);
    else if (key == "batch_size") sc.batch_size = parse_int(value, origin, line_no);
    else if (key == "seq_len") sc.seq_len = parse_int(value, origin, line_no);
    else if (key == "runs") sc.runs = parse_int(value, origin, line_no);
    else if (key == "k_list") sc.k_list = parse_int_list(value, origin, line_no);
    else if (key == "grid_cols") sc.grid_cols = parse_int(value, origin, line_no);
    else if (key == "grid_rows") sc.grid_rows = parse_int(value, origin, line_no);
    else if (key == "speed") sc.speed = parse_num(value, origin, line_no);
    else if (key == "smooth_window") sc.smooth_window = parse_int(value, origin, line_no);
    else if (key == "stroke_px") sc.stroke_px = parse_int(value, origin, line_no);
    else if (key == "chars") sc.chars = value;
    else if (key == "session_seconds") sc.session_seconds = parse_num(value, origin, line_no);
    else if (key == "touches_per_session") sc.touches_per_session = parse_int(value, origin, line_no);
    else parse_fail(origin, line_no, "unknown scenario key '" + key + "'");
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError(FileError::Kind::io, "cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return scenario_from_string(buf.str(), path);
}

// ---- execution context ------------------------------------------------------

namespace {

DeviceProfile resolve_profile(const std::string& name) {
  for (const std::string& builtin : builtin_profile_names())
    if (builtin == name) return builtin_profile(name);
  return load_profile(name);
}

}  // namespace

PipelineContext make_context(const Scenario& sc, std::uint64_t master_seed) {
  sc.validate();
  DeviceProfile profile = resolve_profile(sc.profile);
  if (sc.rx_leak_gain >= 0.0) profile.rx_leak_gain = sc.rx_leak_gain;
  profile.validate();

  PipelineContext ctx;
  ctx.profile = profile;
  ctx.synth = SynthConfig{};
  ctx.synth.sample_rate = sc.sample_rate;
  ctx.distance = sc.distance;

  const double amp = reference_amplitude(profile, sc.distance, ctx.synth);
  NoiseModel noise;
  if (sc.snr > 0.0) {
    // Amplitude SNR against the touched-column burst; hum and drift ride on
    // top at a quarter of the white floor each.
    noise.gaussian_sigma = amp / sc.snr;
    noise.mains_amp = 0.25 * noise.gaussian_sigma;
    noise.background_app_amp = 0.25 * noise.gaussian_sigma;
  }
  noise.seed = master_seed;
  ctx.noise = noise;

  // Window sized to the excitation slot so the detector straddles one burst
  // regardless of the probe sample rate.
  const double slot_samples =
      sc.sample_rate * profile.scan.t_scan / profile.scan.n_tx;
  const std::size_t w = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::llround(1.5 * slot_samples)));
  ctx.seg = SegmentationParams::calibrated(ctx.synth.trigger_gain * amp, w);

  ctx.input_len =
      static_cast<std::size_t>(std::ceil(sc.sample_rate / profile.scan.f_touch));
  if (ctx.input_len < 8)
    throw DomainError("context: sample rate too low, one frame spans fewer than 8 samples");
  return ctx;
}

// ---- observations -----------------------------------------------------------

std::vector<double> observe_key(const PipelineContext& ctx,
                                const KeyLayout& layout, const std::string& key,
                                std::uint64_t seed) {
  const auto it = layout.position.find(key);
  if (it == layout.position.end())
    throw DomainError("observe: key '" + key + "' is not on the layout");
  Rng shape_rng(derive_seed(seed, "touch-shape"));
  TouchEvent ev;
  ev.column = it->second.first;
  ev.row = it->second.second;
  ev.t_approach = shape_rng.uniform(0.008, 0.015);
  ev.t_contact = shape_rng.uniform(0.08, 0.14);
  ev.t_release = shape_rng.uniform(0.015, 0.025);
  ev.label = key;

  DeviceProfile profile = ctx.profile;
  // Under scan-order randomization every observation sees a fresh order
  // stream, the way a defended device would look to a probe.
  if (profile.scan_order_randomized)
    profile.scan_order_seed = derive_seed(seed, "scan-order");

  const EmTrace trace = synthesize_touch_trace(profile, ev, ctx.noise,
                                               ctx.distance, seed, ctx.synth);
  const InterceptResult seg = intercept(trace.samples, ctx.seg);
  return normalize_signal(seg.valid, ctx.input_len);
}

namespace {

// Run `body(i)` for i in [0, n) in parallel, capturing the first exception
// and rethrowing it on the calling thread.
template <typename Fn>
void parallel_indexed(long long n, Fn&& body) {
  std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(scanleak_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

Dataset make_key_dataset(const PipelineContext& ctx, const KeyLayout& layout,
                         int per_class, std::uint64_t seed, bool shuffled) {
  if (per_class < 1) throw DomainError("dataset: per_class must be >= 1");
  layout.validate(ctx.profile);
  const std::size_t n_keys = layout.keys.size();
  const std::size_t n = n_keys * static_cast<std::size_t>(per_class);

  Dataset out;
  out.x = nn::Tensor({n, ctx.input_len});
  out.y.assign(n, 0);
  out.class_names = layout.keys;

  parallel_indexed(static_cast<long long>(n), [&](std::size_t idx) {
    const std::size_t cls = idx / static_cast<std::size_t>(per_class);
    const std::uint64_t obs_seed = derive_seed(seed, "observe", idx);
    std::vector<double> row;
    if (shuffled) {
      const KeyLayout redrawn =
          shuffle_keyboard(layout, derive_seed(seed, "shuffle", idx));
      row = observe_key(ctx, redrawn, layout.keys[cls], obs_seed);
    } else {
      row = observe_key(ctx, layout, layout.keys[cls], obs_seed);
    }
    std::copy(row.begin(), row.end(),
              out.x.data.begin() + static_cast<std::ptrdiff_t>(idx * ctx.input_len));
    out.y[idx] = static_cast<int>(cls);
  });
  return out;
}

Dataset make_zone_dataset(const PipelineContext& ctx, const GridSpec& grid,
                          int per_zone, std::uint64_t seed) {
  if (per_zone < 1) throw DomainError("dataset: per_zone must be >= 1");
  grid.validate();
  if (std::abs(grid.screen_w - ctx.profile.screen_w) > 1e-9 ||
      std::abs(grid.screen_h - ctx.profile.screen_h) > 1e-9)
    throw DomainError("dataset: grid screen size does not match the profile");
  const std::size_t zones = grid.zone_count();
  const std::size_t n = zones * static_cast<std::size_t>(per_zone);

  Dataset out;
  out.x = nn::Tensor({n, ctx.input_len});
  out.y.assign(n, 0);
  out.class_names.reserve(zones);
  for (std::size_t z = 0; z < zones; ++z)
    out.class_names.push_back(std::to_string(z));

  parallel_indexed(static_cast<long long>(n), [&](std::size_t idx) {
    const std::size_t zone = idx / static_cast<std::size_t>(per_zone);
    const int col = static_cast<int>(zone) % grid.cols;
    const int zrow = static_cast<int>(zone) / grid.cols;
    Rng rng(derive_seed(seed, "zone-pos", idx));
    const double x =
        (col + rng.uniform()) * grid.screen_w / grid.cols;
    const double y =
        (zrow + rng.uniform()) * grid.screen_h / grid.rows;
    TouchEvent shape;
    shape.t_approach = rng.uniform(0.008, 0.015);
    shape.t_contact = rng.uniform(0.08, 0.14);
    shape.t_release = rng.uniform(0.015, 0.025);
    shape.label = std::to_string(zone);
    const EmTrace trace =
        synthesize_touch_at(ctx.profile, x, y, shape, ctx.noise, ctx.distance,
                            derive_seed(seed, "zone-obs", idx), ctx.synth);
    const InterceptResult seg = intercept(trace.samples, ctx.seg);
    const std::vector<double> row = normalize_signal(seg.valid, ctx.input_len);
    std::copy(row.begin(), row.end(),
              out.x.data.begin() + static_cast<std::ptrdiff_t>(idx * ctx.input_len));
    out.y[idx] = static_cast<int>(zone);
  });
  return out;
}

// ---- sessions ---------------------------------------------------------------

TouchSession make_session(SessionKind kind, const DeviceProfile& profile,
                          double seconds, std::uint64_t seed) {
  if (!(seconds > 2.0)) throw DomainError("session: duration too short");
  profile.validate();
  Rng rng(derive_seed(seed, "session", static_cast<std::uint64_t>(kind)));
  TouchSession session;
  session.kind = kind;
  session.duration = seconds;

  auto push = [&](double onset, int column, int row, double contact,
                  const std::string& label) {
    SessionEntry entry;
    entry.onset = onset;
    entry.event.column = column;
    entry.event.row = row;
    entry.event.t_approach = 0.02;
    entry.event.t_contact = contact;
    entry.event.t_release = 0.02;
    entry.event.label = label;
    session.entries.push_back(std::move(entry));
  };

  switch (kind) {
    case SessionKind::screen_unlock: {
      // A short burst of PIN-pad taps near the start, then nothing.
      const KeyLayout pad = digit_pad_layout(profile);
      const int taps = rng.uniform_int(4, 6);
      double t = rng.uniform(1.0, 2.5);
      for (int i = 0; i < taps; ++i) {
        const double contact = rng.uniform(0.10, 0.18);
        if (t + contact + 0.2 >= seconds) break;
        const std::string& key = pad.keys[rng.uniform_index(pad.keys.size())];
        const auto [col, row] = pad.position.at(key);
        push(t, col, row, contact, key);
        t += contact + rng.uniform(0.45, 0.85);
      }
      break;
    }
    case SessionKind::keyboard_input: {
      // Sustained typing, roughly two and a half keys a second.
      const KeyLayout board = qwerty_layout(profile);
      double t = rng.uniform(0.8, 1.5);
      while (true) {
        const double contact = rng.uniform(0.06, 0.12);
        if (t + contact + 0.2 >= seconds - 0.5) break;
        const std::string& key =
            board.keys[rng.uniform_index(board.keys.size())];
        const auto [col, row] = board.position.at(key);
        push(t, col, row, contact, key);
        t += contact + rng.uniform(0.18, 0.42);
      }
      break;
    }
    case SessionKind::app_operation: {
      // Sparse taps and longer presses scattered over the whole screen.
      double t = rng.uniform(0.8, 1.5);
      while (true) {
        const double contact = rng.uniform(0.15, 0.8);
        if (t + contact + 0.2 >= seconds - 0.5) break;
        const int col = rng.uniform_int(1, profile.scan.n_tx);
        const int row = rng.uniform_int(1, profile.scan.n_rx);
        push(t, col, row, contact, "");
        t += contact + rng.uniform(1.0, 2.6);
      }
      break;
    }
    case SessionKind::handwriting:
      throw DomainError("session: handwriting sessions are built from trajectories");
  }
  return session;
}

void make_interaction_data(const PipelineContext& ctx, int per_class,
                           std::uint64_t seed,
                           std::vector<std::vector<double>>* features,
                           std::vector<int>* labels,
                           std::vector<std::string>* class_names) {
  if (!features || !labels)
    throw DomainError("interaction data: null output pointer");
  if (per_class < 1) throw DomainError("interaction data: per_class must be >= 1");

  // The classification window every behavioral trace uses.
  constexpr double kSessionSeconds = 30.0;
  static const std::array<SessionKind, 3> kKinds = {
      SessionKind::screen_unlock, SessionKind::keyboard_input,
      SessionKind::app_operation};

  const std::size_t n = kKinds.size() * static_cast<std::size_t>(per_class);
  features->assign(n, {});
  labels->assign(n, 0);
  if (class_names) {
    class_names->clear();
    for (SessionKind kind : kKinds)
      class_names->push_back(session_kind_name(kind));
  }

  const double frame_period = ctx.profile.scan.t_scan;
  parallel_indexed(static_cast<long long>(n), [&](std::size_t idx) {
    const std::size_t cls = idx / static_cast<std::size_t>(per_class);
    const std::uint64_t session_seed = derive_seed(
        seed, session_kind_name(kKinds[cls]), idx % static_cast<std::size_t>(per_class));
    const TouchSession session =
        make_session(kKinds[cls], ctx.profile, kSessionSeconds, session_seed);
    const EmTrace trace = synthesize_session(
        ctx.profile, session, ctx.noise, ctx.distance, session_seed, ctx.synth);
    const InteractionFeatures f =
        extract_interaction_features(trace, ctx.seg, frame_period);
    const auto arr = f.as_array();
    (*features)[idx].assign(arr.begin(), arr.end());
    (*labels)[idx] = static_cast<int>(cls);
  });
}

// ---- training ---------------------------------------------------------------

namespace {

// Convolutional models take {batch, channel, length}; the datasets store
// {batch, length} rows.
nn::Tensor shaped_input(const std::string& model_kind, nn::Tensor x) {
  if (model_kind != "mlp" && x.shape.size() == 2)
    x.shape = {x.shape[0], 1, x.shape[1]};
  return x;
}

}  // namespace

nn::Model train_scenario_model(const Scenario& sc, const Dataset& train,
                               std::uint64_t seed) {
  if (train.size() == 0) throw DomainError("train: empty dataset");
  if (train.x.shape.size() != 2)
    throw DomainError("train: expected {batch, length} features");
  const std::size_t input_len = train.x.shape[1];
  const std::size_t n_class =
      train.class_names.empty()
          ? static_cast<std::size_t>(
                *std::max_element(train.y.begin(), train.y.end())) + 1
          : train.class_names.size();

  nn::ModelSpec spec;
  if (sc.model == "mlp")
    spec = nn::mlp_spec(input_len, n_class);
  else if (sc.model == "cnn")
    spec = nn::cnn_spec(input_len, n_class);
  else if (sc.model == "transformer")
    spec = nn::transformer_spec(input_len, n_class);
  else
    throw DomainError("train: unknown model '" + sc.model + "'");

  nn::Model model(spec, derive_seed(seed, "init"));
  nn::TrainConfig cfg;
  cfg.lr = sc.lr;
  cfg.batch_size = static_cast<std::size_t>(sc.batch_size);
  cfg.epochs = static_cast<std::size_t>(sc.epochs);
  cfg.seed = derive_seed(seed, "train");
  nn::train(model, shaped_input(sc.model, train.x), train.y, cfg);
  return model;
}

// ---- end-to-end runs --------------------------------------------------------

namespace {

// Rethrow library errors with the pipeline stage stamped into the message,
// preserving the concrete type callers branch on.
template <typename Fn>
auto stage(const std::string& tag, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = "[stage " + tag + "] ";
  try {
    return fn();
  } catch (const FileError& e) {
    throw FileError(e.kind, prefix + e.what());
  } catch (const NoTriggerError& e) {
    throw NoTriggerError(prefix + e.what());
  } catch (const NoTerminationError& e) {
    throw NoTerminationError(prefix + e.what());
  } catch (const DegenerateSignalError& e) {
    throw DegenerateSignalError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

double accuracy_of(const std::vector<std::vector<int>>& confusion) {
  long long diag = 0, total = 0;
  for (std::size_t i = 0; i < confusion.size(); ++i)
    for (std::size_t j = 0; j < confusion[i].size(); ++j) {
      total += confusion[i][j];
      if (i == j) diag += confusion[i][j];
    }
  return total == 0 ? 0.0
                    : static_cast<double>(diag) / static_cast<double>(total);
}

void fill_metadata(Report* report, const Scenario& sc,
                   std::uint64_t master_seed) {
  auto& m = report->metadata;
  m["task"] = sc.task;
  m["profile"] = sc.profile;
  m["model"] = sc.model;
  m["countermeasure"] = sc.countermeasure;
  m["sample_rate"] = num_str(sc.sample_rate);
  m["snr"] = num_str(sc.snr);
  m["distance"] = num_str(sc.distance);
  m["rx_leak_gain"] = num_str(sc.rx_leak_gain);
  m["train_per_class"] = std::to_string(sc.train_per_class);
  m["test_per_class"] = std::to_string(sc.test_per_class);
  m["epochs"] = std::to_string(sc.epochs);
  m["lr"] = num_str(sc.lr);
  m["batch_size"] = std::to_string(sc.batch_size);
  m["master_seed"] = std::to_string(master_seed);
}

std::vector<int> sorted_k_list(const Scenario& sc) {
  std::vector<int> ks = sc.k_list;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

Report run_key_task(const Scenario& sc, std::uint64_t m) {
  const PipelineContext ctx = stage("context", [&] { return make_context(sc, m); });
  const KeyLayout layout = sc.task == "pin" ? digit_pad_layout(ctx.profile)
                                            : qwerty_layout(ctx.profile);
  const bool shuffled = sc.countermeasure == "shuffle";
  PipelineContext victim = ctx;
  if (sc.countermeasure == "scanrand")
    victim.profile = randomize_scan_order(ctx.profile, derive_seed(m, "scan-order"));

  const Dataset train_set = stage("synthesize", [&] {
    return make_key_dataset(ctx, layout, sc.train_per_class,
                            derive_seed(m, "train-data"), false);
  });
  const Dataset test_set = stage("synthesize", [&] {
    return make_key_dataset(victim, layout, sc.test_per_class,
                            derive_seed(m, "test-data"), shuffled);
  });
  const nn::Model model = stage("train", [&] {
    return train_scenario_model(sc, train_set, derive_seed(m, "model"));
  });

  Report report;
  report.task = sc.task;
  report.class_names = layout.keys;
  const std::vector<int> preds = stage("classify", [&] {
    return model.predict_labels(shaped_input(sc.model, test_set.x));
  });
  report.confusion = confusion_matrix(test_set.y, preds,
                                      static_cast<int>(layout.keys.size()));
  report.accuracy = accuracy_of(report.confusion);

  stage("attack", [&] {
    const std::size_t n_keys = layout.keys.size();
    const auto seq_len = static_cast<std::size_t>(sc.seq_len);
    std::vector<std::vector<std::vector<double>>> runs_probs(
        static_cast<std::size_t>(sc.runs));
    std::vector<std::vector<int>> runs_truth(static_cast<std::size_t>(sc.runs));
    parallel_indexed(sc.runs, [&](std::size_t run) {
      Rng seq_rng(derive_seed(m, "attack-seq", run));
      std::vector<int>& truth = runs_truth[run];
      truth.resize(seq_len);
      nn::Tensor batch({seq_len, ctx.input_len});
      for (std::size_t pos = 0; pos < seq_len; ++pos) {
        truth[pos] = static_cast<int>(seq_rng.uniform_index(n_keys));
        const std::size_t obs_idx = run * seq_len + pos;
        const std::uint64_t obs_seed = derive_seed(m, "attack-obs", obs_idx);
        std::vector<double> row;
        if (shuffled) {
          const KeyLayout redrawn = shuffle_keyboard(
              layout, derive_seed(m, "attack-shuffle", obs_idx));
          row = observe_key(victim, redrawn,
                            layout.keys[static_cast<std::size_t>(truth[pos])],
                            obs_seed);
        } else {
          row = observe_key(victim, layout,
                            layout.keys[static_cast<std::size_t>(truth[pos])],
                            obs_seed);
        }
        std::copy(row.begin(), row.end(),
                  batch.data.begin() +
                      static_cast<std::ptrdiff_t>(pos * ctx.input_len));
      }
      const nn::Tensor probs = model.predict(shaped_input(sc.model, batch));
      auto& per_pos = runs_probs[run];
      per_pos.assign(seq_len, std::vector<double>(n_keys));
      for (std::size_t pos = 0; pos < seq_len; ++pos)
        for (std::size_t c = 0; c < n_keys; ++c)
          per_pos[pos][c] = probs.data[pos * n_keys + c];
    });
    for (int k : sorted_k_list(sc))
      report.top_k[k] = top_k_sequence_success(
          runs_probs, runs_truth, static_cast<std::size_t>(k));
    return 0;
  });

  fill_metadata(&report, sc, m);
  report.metadata["seq_len"] = std::to_string(sc.seq_len);
  report.metadata["runs"] = std::to_string(sc.runs);
  return report;
}

Report run_zone_task(const Scenario& sc, std::uint64_t m) {
  const PipelineContext ctx = stage("context", [&] { return make_context(sc, m); });
  GridSpec grid;
  grid.cols = sc.grid_cols;
  grid.rows = sc.grid_rows;
  grid.screen_w = ctx.profile.screen_w;
  grid.screen_h = ctx.profile.screen_h;
  PipelineContext victim = ctx;
  if (sc.countermeasure == "scanrand")
    victim.profile = randomize_scan_order(ctx.profile, derive_seed(m, "scan-order"));

  const Dataset train_set = stage("synthesize", [&] {
    return make_zone_dataset(ctx, grid, sc.train_per_class,
                             derive_seed(m, "train-data"));
  });
  const Dataset test_set = stage("synthesize", [&] {
    return make_zone_dataset(victim, grid, sc.test_per_class,
                             derive_seed(m, "test-data"));
  });
  const nn::Model model = stage("train", [&] {
    return train_scenario_model(sc, train_set, derive_seed(m, "model"));
  });

  Report report;
  report.task = sc.task;
  report.class_names = train_set.class_names;
  const std::vector<int> preds = stage("classify", [&] {
    return model.predict_labels(shaped_input(sc.model, test_set.x));
  });
  report.confusion = confusion_matrix(
      test_set.y, preds, static_cast<int>(grid.zone_count()));
  report.accuracy = accuracy_of(report.confusion);
  fill_metadata(&report, sc, m);
  report.metadata["grid"] =
      std::to_string(sc.grid_cols) + "x" + std::to_string(sc.grid_rows);
  return report;
}

Report run_handwriting_task(const Scenario& sc, std::uint64_t m) {
  const PipelineContext ctx = stage("context", [&] { return make_context(sc, m); });
  GridSpec grid;
  grid.cols = sc.grid_cols;
  grid.rows = sc.grid_rows;
  grid.screen_w = ctx.profile.screen_w;
  grid.screen_h = ctx.profile.screen_h;
  PipelineContext victim = ctx;
  if (sc.countermeasure == "scanrand")
    victim.profile = randomize_scan_order(ctx.profile, derive_seed(m, "scan-order"));

  const std::string charset =
      sc.chars.empty() ? recognizable_characters() : sc.chars;

  const Dataset train_set = stage("synthesize", [&] {
    return make_zone_dataset(ctx, grid, sc.train_per_class,
                             derive_seed(m, "train-data"));
  });
  const nn::Model model = stage("train", [&] {
    return train_scenario_model(sc, train_set, derive_seed(m, "model"));
  });

  // The attacker knows the candidate alphabet; score only those templates.
  std::vector<CharacterTemplate> templates;
  for (const CharacterTemplate& t : builtin_templates())
    if (t.label.size() == 1 && charset.find(t.label[0]) != std::string::npos)
      templates.push_back(t);

  // Character drawn centered on the screen, sized to fit with margin.
  const double height =
      std::min(0.6 * ctx.profile.screen_h, 0.8 * ctx.profile.screen_w / 0.7);
  const double cx = 0.5 * ctx.profile.screen_w;
  const double cy = 0.5 * ctx.profile.screen_h;
  const double gap_seconds = 1.8 * ctx.profile.scan.t_scan;

  const auto n_runs = static_cast<std::size_t>(sc.runs);
  std::vector<int> truth(n_runs), preds(n_runs);
  std::vector<std::vector<int>> ranked_labels(n_runs);
  stage("attack", [&] {
    parallel_indexed(sc.runs, [&](std::size_t run) {
      Rng rng(derive_seed(m, "hand-char", run));
      const std::size_t pick = rng.uniform_index(charset.size());
      const char c = charset[pick];
      const Trajectory path = character_trajectory(c, cx, cy, height, 0.01);
      const EmTrace trace = synthesize_handwriting(
          victim.profile, path, sc.speed, ctx.noise, ctx.distance,
          derive_seed(m, "hand-trace", run), ctx.synth);
      const Trajectory recovered =
          recover_positions(trace, model, grid, ctx.seg, ctx.input_len);
      const Trajectory strokes = splice(split_at_gaps(recovered, gap_seconds));
      const Trajectory smoothed = smooth(strokes, sc.smooth_window);
      const std::vector<RankedLabel> ranked =
          recognize_character(smoothed, templates, 96, sc.stroke_px);
      truth[run] = static_cast<int>(pick);
      preds[run] = static_cast<int>(charset.find(ranked.front().label[0]));
      ranked_labels[run].reserve(ranked.size());
      for (const RankedLabel& r : ranked)
        ranked_labels[run].push_back(
            static_cast<int>(charset.find(r.label[0])));
    });
    return 0;
  });

  Report report;
  report.task = sc.task;
  for (char c : charset) report.class_names.push_back(std::string(1, c));
  report.confusion =
      confusion_matrix(truth, preds, static_cast<int>(charset.size()));
  report.accuracy = accuracy_of(report.confusion);
  for (int k : sorted_k_list(sc)) {
    std::size_t hits = 0;
    for (std::size_t run = 0; run < n_runs; ++run) {
      const auto& ranked = ranked_labels[run];
      const auto upto = std::min<std::size_t>(static_cast<std::size_t>(k),
                                              ranked.size());
      for (std::size_t i = 0; i < upto; ++i)
        if (ranked[i] == truth[run]) {
          ++hits;
          break;
        }
    }
    report.top_k[k] = static_cast<double>(hits) / static_cast<double>(n_runs);
  }
  fill_metadata(&report, sc, m);
  report.metadata["runs"] = std::to_string(sc.runs);
  report.metadata["speed"] = num_str(sc.speed);
  report.metadata["chars"] = charset;
  return report;
}

Report run_interaction_task(const Scenario& sc, std::uint64_t m) {
  const PipelineContext ctx = stage("context", [&] { return make_context(sc, m); });
  const int per_class = sc.train_per_class + sc.test_per_class;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> names;
  stage("synthesize", [&] {
    make_interaction_data(ctx, per_class, derive_seed(m, "sessions"), &features,
                          &labels, &names);
    return 0;
  });

  // Sessions are generated independently per index, so the first
  // train_per_class of each class form the training set.
  std::vector<std::vector<double>> train_x, test_x;
  std::vector<int> train_y, test_y;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto within = static_cast<int>(i % static_cast<std::size_t>(per_class));
    if (within < sc.train_per_class) {
      train_x.push_back(features[i]);
      train_y.push_back(labels[i]);
    } else {
      test_x.push_back(features[i]);
      test_y.push_back(labels[i]);
    }
  }

  const Forest forest = stage("train", [&] {
    return train_forest(train_x, train_y, ForestConfig{});
  });
  std::vector<int> preds;
  preds.reserve(test_x.size());
  stage("classify", [&] {
    for (const auto& row : test_x) preds.push_back(forest.predict(row).label);
    return 0;
  });

  Report report;
  report.task = sc.task;
  report.class_names = names;
  report.confusion =
      confusion_matrix(test_y, preds, static_cast<int>(names.size()));
  report.accuracy = accuracy_of(report.confusion);
  fill_metadata(&report, sc, m);
  report.metadata["classifier"] = "forest";
  report.metadata["n_estimators"] = std::to_string(ForestConfig{}.n_estimators);
  return report;
}

// Spatial usage archetypes for the app-category task: each class is a
// mixture of Gaussian hotspots in screen fractions.
struct Hotspot {
  double cx, cy, sigma, weight;
};

const std::array<std::vector<Hotspot>, 4>& app_mixtures() {
  static const std::array<std::vector<Hotspot>, 4> kMixtures = {{
      {{0.50, 0.72, 0.10, 0.65}, {0.50, 0.90, 0.07, 0.35}},
      {{0.18, 0.85, 0.06, 0.50}, {0.82, 0.85, 0.06, 0.50}},
      {{0.50, 0.12, 0.06, 0.45}, {0.50, 0.45, 0.14, 0.55}},
      {{0.10, 0.40, 0.07, 0.50}, {0.90, 0.55, 0.08, 0.50}},
  }};
  return kMixtures;
}

const std::array<const char*, 4> kAppClassNames = {
    "bottom_scroll", "thumb_corners", "top_nav", "edge_controls"};

Report run_apps_task(const Scenario& sc, std::uint64_t m) {
  const PipelineContext ctx = stage("context", [&] { return make_context(sc, m); });
  GridSpec grid;
  grid.cols = sc.grid_cols;
  grid.rows = sc.grid_rows;
  grid.screen_w = ctx.profile.screen_w;
  grid.screen_h = ctx.profile.screen_h;
  grid.validate();

  const int per_class = sc.train_per_class + sc.test_per_class;
  const std::size_t n_class = app_mixtures().size();
  const std::size_t n = n_class * static_cast<std::size_t>(per_class);
  const std::size_t zones = grid.zone_count();

  Dataset all;
  all.x = nn::Tensor({n, zones});
  all.y.assign(n, 0);
  for (const char* name : kAppClassNames) all.class_names.push_back(name);

  stage("synthesize", [&] {
    parallel_indexed(static_cast<long long>(n), [&](std::size_t idx) {
      const std::size_t cls = idx / static_cast<std::size_t>(per_class);
      const std::vector<Hotspot>& mix = app_mixtures()[cls];
      double total_weight = 0.0;
      for (const Hotspot& h : mix) total_weight += h.weight;
      Rng rng(derive_seed(m, "app-session", idx));
      for (int t = 0; t < sc.touches_per_session; ++t) {
        double pick = rng.uniform() * total_weight;
        const Hotspot* spot = &mix.back();
        for (const Hotspot& h : mix) {
          if (pick < h.weight) {
            spot = &h;
            break;
          }
          pick -= h.weight;
        }
        const double x = std::clamp(
            rng.normal(spot->cx * grid.screen_w, spot->sigma * grid.screen_w),
            1e-4, grid.screen_w - 1e-4);
        const double y = std::clamp(
            rng.normal(spot->cy * grid.screen_h, spot->sigma * grid.screen_h),
            1e-4, grid.screen_h - 1e-4);
        all.x.data[idx * zones + static_cast<std::size_t>(grid_zone(x, y, grid))] +=
            1.0 / sc.touches_per_session;
      }
      all.y[idx] = static_cast<int>(cls);
    });
    return 0;
  });

  // Index-based split; rows were generated independently per index.
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto within = static_cast<int>(i % static_cast<std::size_t>(per_class));
    (within < sc.train_per_class ? train_rows : test_rows).push_back(i);
  }
  auto take = [&](const std::vector<std::size_t>& rows) {
    Dataset out;
    out.x = nn::Tensor({rows.size(), zones});
    out.class_names = all.class_names;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy_n(all.x.data.begin() + static_cast<std::ptrdiff_t>(rows[i] * zones),
                  zones,
                  out.x.data.begin() + static_cast<std::ptrdiff_t>(i * zones));
      out.y.push_back(all.y[rows[i]]);
    }
    return out;
  };
  const Dataset train_set = take(train_rows);
  const Dataset test_set = take(test_rows);

  const nn::Model model = stage("train", [&] {
    return train_scenario_model(sc, train_set, derive_seed(m, "model"));
  });
  Report report;
  report.task = sc.task;
  report.class_names = all.class_names;
  const std::vector<int> preds = stage("classify", [&] {
    return model.predict_labels(shaped_input(sc.model, test_set.x));
  });
  report.confusion =
      confusion_matrix(test_set.y, preds, static_cast<int>(n_class));
  report.accuracy = accuracy_of(report.confusion);
  fill_metadata(&report, sc, m);
  report.metadata["touches_per_session"] = std::to_string(sc.touches_per_session);
  report.metadata["session_seconds"] = num_str(sc.session_seconds);
  return report;
}

}  // namespace

Report run_end_to_end(const Scenario& sc, std::uint64_t master_seed) {
  sc.validate();
  if (sc.task == "pin" || sc.task == "keyboard") return run_key_task(sc, master_seed);
  if (sc.task == "zones") return run_zone_task(sc, master_seed);
  if (sc.task == "handwriting") return run_handwriting_task(sc, master_seed);
  if (sc.task == "interaction") return run_interaction_task(sc, master_seed);
  if (sc.task == "apps") return run_apps_task(sc, master_seed);
  throw DomainError("scenario: unknown task '" + sc.task + "'");
}

}  // namespace scanleak
