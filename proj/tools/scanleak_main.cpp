// scanleak command line tool: synthesis, interception, normalization,
// training, prediction, and full attack scenarios over one shared library.
//
// Exit codes: 0 success, 2 usage, 3 file problems, 4 interception failures
// (no trigger / no termination), 5 invalid values, 1 anything else.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scanleak/errors.hpp"
#include "scanleak/harness.hpp"
#include "scanleak/interaction.hpp"
#include "scanleak/nn/model.hpp"
#include "scanleak/normalization.hpp"
#include "scanleak/rng.hpp"
#include "scanleak/scenario.hpp"
#include "scanleak/segmentation.hpp"
#include "scanleak/trace_io.hpp"
#include "scanleak/trace_synth.hpp"
#include "scanleak/trajectory.hpp"

namespace {

using namespace scanleak;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFile = 3;
constexpr int kExitIntercept = 4;
constexpr int kExitDomain = 5;
constexpr int kExitOther = 1;

// ---- shared flag groups -----------------------------------------------------

struct SegFlags {
  std::size_t w = 0;  // 0 = derive from the profile scan timing
  double peak = 0.0;  // calibrated thresholds when > 0
  double d_tri = 0.0, v_tri = 0.0, d_ter = 0.0, v_ter = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--w", w, "detector window length in samples (default: 1.5 excitation slots)");
    cmd->add_option("--peak", peak, "known trigger spike amplitude; enables calibrated thresholds");
    cmd->add_option("--d-tri", d_tri, "explicit trigger slope threshold");
    cmd->add_option("--v-tri", v_tri, "explicit trigger variance ceiling");
    cmd->add_option("--d-ter", d_ter, "explicit termination slope threshold");
    cmd->add_option("--v-ter", v_ter, "explicit termination variance ceiling");
  }

  std::size_t window(const EmTrace& trace, const DeviceProfile* profile) const {
    if (w > 0) return w;
    if (profile) {
      const double slot = trace.sample_rate * profile->scan.t_scan /
                          profile->scan.n_tx;
      return std::max<std::size_t>(
          8, static_cast<std::size_t>(std::llround(1.5 * slot)));
    }
    return 16;
  }

  SegmentationParams resolve(const EmTrace& trace,
                             const DeviceProfile* profile) const {
    const std::size_t win = window(trace, profile);
    if (d_tri > 0.0 || v_tri > 0.0 || d_ter > 0.0 || v_ter > 0.0) {
      SegmentationParams p;
      p.w = win;
      p.d_tri = d_tri;
      p.v_tri = v_tri;
      p.d_ter = d_ter;
      p.v_ter = v_ter;
      p.validate();
      return p;
    }
    if (peak > 0.0) return SegmentationParams::calibrated(peak, win);
    return SegmentationParams::auto_from_prefix(trace.samples, win);
  }
};

DeviceProfile profile_by_name(const std::string& name) {
  for (const std::string& builtin : builtin_profile_names())
    if (builtin == name) return builtin_profile(name);
  return load_profile(name);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FileError(FileError::Kind::io, "cannot create " + path);
  os << text;
  if (!os.flush()) throw FileError(FileError::Kind::io, "write failed: " + path);
}

void emit_json(const nlohmann::json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string profile = "iphone_x";
  std::string task = "pin";  // pin | keyboard | session
  std::string kind = "keyboard_input";
  std::string out;
  int count = 10;
  double snr = 0.0;
  double distance = 0.05;
  double sample_rate = 20000.0;
  double duration = 30.0;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  Scenario sc;
  sc.profile = a.profile;
  sc.sample_rate = a.sample_rate;
  sc.snr = a.snr;
  sc.distance = a.distance;
  const PipelineContext ctx = make_context(sc, a.seed);

  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) throw FileError(FileError::Kind::io, "cannot create directory " + a.out);

  std::vector<ManifestEntry> manifest;
  auto record = [&](const EmTrace& trace, const std::string& file,
                    const std::string& label, const std::string& kind,
                    std::uint64_t seed) {
    save_trace(trace, a.out + "/" + file);
    ManifestEntry entry;
    entry.path = file;
    entry.label = label;
    entry.session_kind = kind;
    entry.seed = seed;
    entry.distance = a.distance;
    manifest.push_back(std::move(entry));
  };

  if (a.task == "pin" || a.task == "keyboard") {
    const KeyLayout layout = a.task == "pin" ? digit_pad_layout(ctx.profile)
                                             : qwerty_layout(ctx.profile);
    for (std::size_t c = 0; c < layout.keys.size(); ++c) {
      const std::string& key = layout.keys[c];
      const auto [col, row] = layout.position.at(key);
      for (int i = 0; i < a.count; ++i) {
        const std::uint64_t obs_seed =
            derive_seed(a.seed, "observe", c * static_cast<std::size_t>(a.count) +
                                               static_cast<std::size_t>(i));
        Rng shape(derive_seed(obs_seed, "touch-shape"));
        TouchEvent ev;
        ev.column = col;
        ev.row = row;
        ev.t_approach = shape.uniform(0.008, 0.015);
        ev.t_contact = shape.uniform(0.08, 0.14);
        ev.t_release = shape.uniform(0.015, 0.025);
        ev.label = key;
        const EmTrace trace = synthesize_touch_trace(
            ctx.profile, ev, ctx.noise, ctx.distance, obs_seed, ctx.synth);
        record(trace,
               a.task + "_" + key + "_" + std::to_string(i) + ".tesl", key,
               "", obs_seed);
      }
    }
  } else if (a.task == "session") {
    const SessionKind kind = session_kind_from_name(a.kind);
    for (int i = 0; i < a.count; ++i) {
      const std::uint64_t s =
          derive_seed(a.seed, "session-trace", static_cast<std::uint64_t>(i));
      const TouchSession session =
          make_session(kind, ctx.profile, a.duration, s);
      const EmTrace trace = synthesize_session(ctx.profile, session, ctx.noise,
                                               ctx.distance, s, ctx.synth);
      record(trace, "session_" + a.kind + "_" + std::to_string(i) + ".tesl",
             a.kind, a.kind, s);
    }
  } else {
    throw DomainError("synth: unknown task '" + a.task + "'");
  }

  save_manifest(manifest, a.out + "/manifest.jsonl");
  std::cout << manifest.size() << " traces -> " << a.out << "\n";
  return kExitOk;
}

// ---- segment / normalize ----------------------------------------------------

struct SegmentArgs {
  std::string in;
  std::string profile;
  std::string out;
  SegFlags seg;
  bool first_only = false;
};

int run_segment(const SegmentArgs& a) {
  const EmTrace trace = load_trace(a.in);
  DeviceProfile profile;
  const bool have_profile = !a.profile.empty();
  if (have_profile) profile = profile_by_name(a.profile);
  const SegmentationParams params =
      a.seg.resolve(trace, have_profile ? &profile : nullptr);

  nlohmann::json j;
  j["w"] = params.w;
  nlohmann::json segs = nlohmann::json::array();
  if (a.first_only) {
    const InterceptResult r = intercept(trace.samples, params);
    segs.push_back({{"t_tri", r.bounds.t_tri}, {"t_ter", r.bounds.t_ter}});
  } else {
    for (const InterceptResult& r : intercept_all(trace, params))
      segs.push_back({{"t_tri", r.bounds.t_tri}, {"t_ter", r.bounds.t_ter}});
  }
  j["segments"] = segs;
  j["count"] = segs.size();
  emit_json(j, a.out);
  return kExitOk;
}

struct NormalizeArgs {
  std::string in;
  std::string profile;
  std::string out;
  SegFlags seg;
  std::size_t target_len = 0;
};

int run_normalize(const NormalizeArgs& a) {
  const EmTrace trace = load_trace(a.in);
  DeviceProfile profile;
  const bool have_profile = !a.profile.empty();
  if (have_profile) profile = profile_by_name(a.profile);
  std::size_t target = a.target_len;
  if (target == 0) {
    if (!have_profile)
      throw DomainError("normalize: need --target-len or --profile");
    target = static_cast<std::size_t>(
        std::ceil(trace.sample_rate / profile.scan.f_touch));
  }
  const SegmentationParams params =
      a.seg.resolve(trace, have_profile ? &profile : nullptr);

  const std::vector<InterceptResult> segments = intercept_all(trace, params);
  if (segments.empty()) throw NoTriggerError("normalize: no segments in " + a.in);
  Matrix m;
  m.rows = static_cast<std::uint32_t>(segments.size());
  m.cols = static_cast<std::uint32_t>(target);
  m.values.reserve(static_cast<std::size_t>(m.rows) * m.cols);
  for (const InterceptResult& r : segments) {
    const std::vector<double> row = normalize_signal(r.valid, target);
    for (double v : row) m.values.push_back(static_cast<float>(v));
  }
  save_matrix(m, a.out);
  std::cout << m.rows << " segments x " << m.cols << " samples -> " << a.out
            << "\n";
  return kExitOk;
}

// ---- train / predict --------------------------------------------------------

struct TrainArgs {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
  std::string model_override;
  int epochs_override = 0;
  int per_class_override = 0;
};

int run_train(const TrainArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  if (!a.model_override.empty()) sc.model = a.model_override;
  if (a.epochs_override > 0) sc.epochs = a.epochs_override;
  if (a.per_class_override > 0) sc.train_per_class = a.per_class_override;
  sc.validate();
  const PipelineContext ctx = make_context(sc, a.seed);

  if (sc.task == "interaction") {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    make_interaction_data(ctx, sc.train_per_class, derive_seed(a.seed, "sessions"),
                          &features, &labels, nullptr);
    const Forest forest = train_forest(features, labels, ForestConfig{});
    save_forest(forest, a.out);
    std::cout << "forest: " << forest.trees().size() << " trees, "
              << forest.n_classes() << " classes -> " << a.out << "\n";
    return kExitOk;
  }
  if (sc.task == "apps")
    throw DomainError("train: the apps task trains inside e2e");

  Dataset train_set;
  if (sc.task == "pin" || sc.task == "keyboard") {
    const KeyLayout layout = sc.task == "pin" ? digit_pad_layout(ctx.profile)
                                              : qwerty_layout(ctx.profile);
    train_set = make_key_dataset(ctx, layout, sc.train_per_class,
                                 derive_seed(a.seed, "train-data"));
  } else {  // zones, handwriting: both train the zone recovery model
    GridSpec grid;
    grid.cols = sc.grid_cols;
    grid.rows = sc.grid_rows;
    grid.screen_w = ctx.profile.screen_w;
    grid.screen_h = ctx.profile.screen_h;
    train_set = make_zone_dataset(ctx, grid, sc.train_per_class,
                                  derive_seed(a.seed, "train-data"));
  }
  nn::Model model =
      train_scenario_model(sc, train_set, derive_seed(a.seed, "model"));
  nn::save_model(model, a.out);
  std::cout << sc.model << ": " << nn::parameter_count(model) << " parameters, "
            << train_set.size() << " training rows -> " << a.out << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string in;
  std::string out;
  std::size_t top = 1;
};

int run_predict(const PredictArgs& a) {
  const nn::Model model = nn::load_model(a.model);
  const Matrix m = load_matrix(a.in);
  if (m.rows == 0) throw DomainError("predict: empty input matrix");

  const std::vector<std::size_t>& in_shape = model.spec().input_shape;
  std::size_t flat = 1;
  for (std::size_t d : in_shape) flat *= d;
  if (flat != m.cols)
    throw DomainError("predict: matrix has " + std::to_string(m.cols) +
                      " columns, model expects " + std::to_string(flat));
  std::vector<std::size_t> shape;
  shape.push_back(m.rows);
  shape.insert(shape.end(), in_shape.begin(), in_shape.end());
  nn::Tensor x(shape);
  std::copy(m.values.begin(), m.values.end(), x.data.begin());

  const nn::Tensor probs = model.predict(x);
  const std::size_t n_class = model.n_classes();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::vector<int> order(n_class);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int p, int q) {
      return probs.data[r * n_class + static_cast<std::size_t>(p)] >
             probs.data[r * n_class + static_cast<std::size_t>(q)];
    });
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min(a.top, n_class); ++i)
      top.push_back({{"class", order[i]},
                     {"prob", probs.data[r * n_class +
                                         static_cast<std::size_t>(order[i])]}});
    rows.push_back({{"label", order[0]}, {"top", top}});
  }
  emit_json({{"predictions", rows}}, a.out);
  return kExitOk;
}

// ---- classify-interaction ---------------------------------------------------

struct ClassifyArgs {
  std::string in;
  std::string forest;
  std::string profile = "iphone_x";
  std::string out;
  SegFlags seg;
};

int run_classify_interaction(const ClassifyArgs& a) {
  const EmTrace trace = load_trace(a.in);
  const Forest forest = load_forest(a.forest);
  const DeviceProfile profile = profile_by_name(a.profile);
  const SegmentationParams params = a.seg.resolve(trace, &profile);

  const InteractionFeatures f =
      extract_interaction_features(trace, params, profile.scan.t_scan);
  const ForestPrediction pred = forest.predict(
      std::vector<double>(f.as_array().begin(), f.as_array().end()));

  nlohmann::json j;
  j["class"] = pred.label;
  if (forest.n_classes() == 3) {
    static const char* kNames[3] = {"screen_unlock", "keyboard_input",
                                    "app_operation"};
    j["label"] = kNames[pred.label];
  }
  j["votes"] = pred.votes;
  nlohmann::json feats;
  const auto values = f.as_array();
  const auto names = InteractionFeatures::names();
  for (std::size_t i = 0; i < values.size(); ++i) feats[names[i]] = values[i];
  j["features"] = feats;
  emit_json(j, a.out);
  return kExitOk;
}

// ---- trajectory -------------------------------------------------------------

struct TrajectoryArgs {
  std::string in;
  std::string model;
  std::string profile = "iphone_x";
  std::string out;
  std::string pbm;
  SegFlags seg;
  int grid_cols = 15;
  int grid_rows = 32;
  int smooth_window = 11;
  double gap = 0.0;  // 0 = 1.8 frame periods
  bool recognize = false;
  int canvas = 96;
  int stroke_px = 5;
};

int run_trajectory(const TrajectoryArgs& a) {
  const EmTrace trace = load_trace(a.in);
  const nn::Model model = nn::load_model(a.model);
  const DeviceProfile profile = profile_by_name(a.profile);
  const SegmentationParams params = a.seg.resolve(trace, &profile);

  GridSpec grid;
  grid.cols = a.grid_cols;
  grid.rows = a.grid_rows;
  grid.screen_w = profile.screen_w;
  grid.screen_h = profile.screen_h;
  const auto input_len = static_cast<std::size_t>(
      std::ceil(trace.sample_rate / profile.scan.f_touch));

  const Trajectory recovered =
      recover_positions(trace, model, grid, params, input_len);
  const double gap = a.gap > 0.0 ? a.gap : 1.8 * profile.scan.t_scan;
  const Trajectory strokes = splice(split_at_gaps(recovered, gap));
  const Trajectory smoothed = smooth(strokes, a.smooth_window);

  if (!a.out.empty()) {
    // One JSON object per point: time, screen meters, stroke index.
    std::string text;
    std::size_t stroke = 0, next_break = 0;
    for (std::size_t i = 0; i < smoothed.points.size(); ++i) {
      if (next_break < smoothed.stroke_starts.size() &&
          smoothed.stroke_starts[next_break] == i) {
        ++stroke;
        ++next_break;
      }
      nlohmann::json j;
      j["t"] = smoothed.points[i].t;
      j["x"] = smoothed.points[i].x;
      j["y"] = smoothed.points[i].y;
      j["stroke"] = stroke;
      text += j.dump() + "\n";
    }
    write_text(a.out, text);
  }
  if (!a.pbm.empty()) {
    const int height_px = std::max(
        1, static_cast<int>(std::lround(a.canvas * grid.screen_h / grid.screen_w)));
    const RasterMask mask = rasterize(smoothed, a.canvas, height_px,
                                      a.stroke_px, grid.screen_w, grid.screen_h);
    save_pbm(mask, a.pbm);
  }
  if (a.recognize) {
    const std::vector<RankedLabel> ranked =
        recognize_character(smoothed, builtin_templates(), a.canvas, a.stroke_px);
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i)
      top.push_back({{"label", ranked[i].label}, {"score", ranked[i].score}});
    emit_json({{"ranked", top}}, "");
  }
  std::cout << smoothed.points.size() << " points, "
            << smoothed.stroke_count() << " strokes\n";
  return kExitOk;
}

// ---- e2e / countermeasure ---------------------------------------------------

void print_report_line(const Report& r) {
  std::cout << "task=" << r.task << " accuracy=" << r.accuracy;
  for (const auto& [k, rate] : r.top_k) std::cout << " T-" << k << "=" << rate;
  std::cout << "\n";
}

struct E2eArgs {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
};

int run_e2e(const E2eArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  const Report report = run_end_to_end(sc, a.seed);
  emit_report(report, a.out);
  print_report_line(report);
  return kExitOk;
}

struct CounterArgs {
  std::string scenario;
  std::string which;
  std::string out;
  std::uint64_t seed = 0;
};

int run_countermeasure(const CounterArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  if (!a.which.empty()) sc.countermeasure = a.which;
  if (sc.countermeasure == "none")
    throw DomainError(
        "countermeasure: pick one with --which or in the scenario file");
  sc.validate();

  Scenario baseline = sc;
  baseline.countermeasure = "none";
  const Report before = run_end_to_end(baseline, a.seed);
  const Report after = run_end_to_end(sc, a.seed);
  emit_report(before, a.out + "/baseline");
  emit_report(after, a.out + "/defended");

  std::cout << "baseline: ";
  print_report_line(before);
  std::cout << sc.countermeasure << ": ";
  print_report_line(after);
  std::cout << "accuracy drop: " << before.accuracy - after.accuracy << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"electromagnetic touchscreen side-channel toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "synthesize labeled traces plus a manifest");
  synth->add_option("--profile", synth_args.profile, "device profile name or file");
  synth->add_option("--task", synth_args.task, "pin | keyboard | session");
  synth->add_option("--kind", synth_args.kind, "session kind for --task session");
  synth->add_option("--count", synth_args.count, "traces per class")->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--snr", synth_args.snr, "amplitude SNR; 0 = noiseless");
  synth->add_option("--distance", synth_args.distance, "probe distance, meters");
  synth->add_option("--sample-rate", synth_args.sample_rate, "probe sample rate, Hz");
  synth->add_option("--duration", synth_args.duration, "session length, seconds");
  synth->add_option("--seed", synth_args.seed, "master seed");

  SegmentArgs segment_args;
  CLI::App* segment = app.add_subcommand("segment", "intercept per-frame segments in a trace");
  segment->add_option("--in", segment_args.in, "input trace file")->required();
  segment->add_option("--profile", segment_args.profile, "device profile for window sizing");
  segment->add_option("--out", segment_args.out, "write JSON here instead of stdout");
  segment->add_flag("--first", segment_args.first_only, "report only the first segment");
  segment_args.seg.attach(segment);
  std::uint64_t segment_seed = 0;
  segment->add_option("--seed", segment_seed, "accepted for interface symmetry");

  NormalizeArgs normalize_args;
  CLI::App* normalize = app.add_subcommand("normalize", "intercept and normalize segments into a matrix");
  normalize->add_option("--in", normalize_args.in, "input trace file")->required();
  normalize->add_option("--profile", normalize_args.profile, "device profile (derives --target-len)");
  normalize->add_option("--target-len", normalize_args.target_len, "output row length");
  normalize->add_option("--out", normalize_args.out, "output matrix file")->required();
  normalize_args.seg.attach(normalize);
  std::uint64_t normalize_seed = 0;
  normalize->add_option("--seed", normalize_seed, "accepted for interface symmetry");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train the classifier a scenario calls for");
  train->add_option("--scenario", train_args.scenario, "scenario file")->required();
  train->add_option("--out", train_args.out, "output model file")->required();
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--model", train_args.model_override, "override the scenario model");
  train->add_option("--epochs", train_args.epochs_override, "override training epochs");
  train->add_option("--per-class", train_args.per_class_override, "override training samples per class");

  PredictArgs predict_args;
  CLI::App* predict = app.add_subcommand("predict", "classify normalized signal rows");
  predict->add_option("--model", predict_args.model, "model checkpoint")->required();
  predict->add_option("--in", predict_args.in, "matrix of normalized rows")->required();
  predict->add_option("--out", predict_args.out, "write JSON here instead of stdout");
  predict->add_option("--top", predict_args.top, "ranked classes to report per row");
  std::uint64_t predict_seed = 0;
  predict->add_option("--seed", predict_seed, "accepted for interface symmetry");

  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand("classify-interaction", "label a session trace with a trained forest");
  classify->add_option("--in", classify_args.in, "input trace file")->required();
  classify->add_option("--forest", classify_args.forest, "forest file")->required();
  classify->add_option("--profile", classify_args.profile, "device profile name or file");
  classify->add_option("--out", classify_args.out, "write JSON here instead of stdout");
  classify_args.seg.attach(classify);
  std::uint64_t classify_seed = 0;
  classify->add_option("--seed", classify_seed, "accepted for interface symmetry");

  TrajectoryArgs traj_args;
  CLI::App* traj = app.add_subcommand("trajectory", "recover a drawn path from a handwriting trace");
  traj->add_option("--in", traj_args.in, "input trace file")->required();
  traj->add_option("--model", traj_args.model, "zone classifier checkpoint")->required();
  traj->add_option("--profile", traj_args.profile, "device profile name or file");
  traj->add_option("--out", traj_args.out, "trajectory output, one JSON point per line");
  traj->add_option("--pbm", traj_args.pbm, "also rasterize to this PBM file");
  traj->add_option("--grid-cols", traj_args.grid_cols, "zone grid columns");
  traj->add_option("--grid-rows", traj_args.grid_rows, "zone grid rows");
  traj->add_option("--smooth", traj_args.smooth_window, "smoothing window, odd");
  traj->add_option("--gap", traj_args.gap, "stroke split gap, seconds (0 = 1.8 frames)");
  traj->add_flag("--recognize", traj_args.recognize, "rank characters against the built-in templates");
  traj->add_option("--canvas", traj_args.canvas, "raster canvas size, pixels");
  traj->add_option("--stroke-px", traj_args.stroke_px, "raster stroke width, pixels");
  traj_args.seg.attach(traj);
  std::uint64_t traj_seed = 0;
  traj->add_option("--seed", traj_seed, "accepted for interface symmetry");

  E2eArgs e2e_args;
  CLI::App* e2e = app.add_subcommand("e2e", "run a full scenario and emit its report");
  e2e->add_option("--scenario", e2e_args.scenario, "scenario file")->required();
  e2e->add_option("--out", e2e_args.out, "report directory")->required();
  e2e->add_option("--seed", e2e_args.seed, "master seed");

  CounterArgs counter_args;
  CLI::App* counter = app.add_subcommand("countermeasure", "run a scenario with and without its defense");
  counter->add_option("--scenario", counter_args.scenario, "scenario file")->required();
  counter->add_option("--which", counter_args.which, "shuffle | scanrand (overrides the scenario)");
  counter->add_option("--out", counter_args.out, "report directory")->required();
  counter->add_option("--seed", counter_args.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (segment->parsed()) return run_segment(segment_args);
    if (normalize->parsed()) return run_normalize(normalize_args);
    if (train->parsed()) return run_train(train_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (classify->parsed()) return run_classify_interaction(classify_args);
    if (traj->parsed()) return run_trajectory(traj_args);
    if (e2e->parsed()) return run_e2e(e2e_args);
    if (counter->parsed()) return run_countermeasure(counter_args);
  } catch (const FileError& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitFile;
  } catch (const NoTriggerError& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitIntercept;
  } catch (const NoTerminationError& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitIntercept;
  } catch (const DomainError& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitDomain;
  } catch (const DegenerateSignalError& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitDomain;
  } catch (const Error& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitOther;
  } catch (const std::exception& e) {
    std::cerr << "scanleak: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitUsage;
}
