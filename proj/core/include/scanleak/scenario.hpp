#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "scanleak/harness.hpp"
#include "scanleak/interaction.hpp"
#include "scanleak/nn/train.hpp"
#include "scanleak/trace_synth.hpp"
#include "scanleak/trajectory.hpp"

namespace scanleak {

// A self-contained experiment description, loadable from a key = value file.
// Every random draw inside a run derives from one master seed, so rerunning
// a scenario reproduces its report byte for byte.
struct Scenario {
  std::string task = "pin";        // pin|keyboard|zones|handwriting|interaction|apps
  std::string profile = "iphone_x";  // builtin name or profile file path
  std::string model = "mlp";       // mlp|cnn|transformer
  std::string countermeasure = "none";  // none|shuffle|scanrand

  double sample_rate = 20000.0;
  double snr = 0.0;                // amplitude SNR; 0 disables noise
  double distance = 0.05;          // meters
  double rx_leak_gain = -1.0;      // <0 keeps the profile's value

  int train_per_class = 200;
  int test_per_class = 50;
  int epochs = 12;
  double lr = 1e-3;
  int batch_size = 32;

  int seq_len = 4;                 // sequence attack length
  int runs = 300;                  // sequence attack repetitions
  std::vector<int> k_list = {1, 3, 5};

  int grid_cols = 15;              // zone tasks
  int grid_rows = 32;
  double speed = 0.02;             // handwriting, meters/second
  int smooth_window = 11;
  int stroke_px = 5;               // rasterization width for scoring
  std::string chars = "";          // handwriting set; empty = all
  double session_seconds = 30.0;   // interaction/apps session length
  int touches_per_session = 40;    // apps task

  void validate() const;
};

Scenario scenario_from_string(const std::string& text,
                              const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

// Resolved execution context shared by every stage of a run.
struct PipelineContext {
  DeviceProfile profile;
  SynthConfig synth;
  NoiseModel noise;            // sigma derived from snr at `distance`
  double distance = 0.05;
  SegmentationParams seg;      // calibrated from the reference amplitude
  std::size_t input_len = 0;   // ceil(sample_rate / f_touch)
};

PipelineContext make_context(const Scenario& sc, std::uint64_t master_seed);

// Normalized first contact frame of one synthesized observation of `key`
// on `layout`: synthesize, intercept, resample, standardize.
std::vector<double> observe_key(const PipelineContext& ctx,
                                const KeyLayout& layout,
                                const std::string& key, std::uint64_t seed);

// Labeled dataset of intercepted + normalized observations, one class per
// layout key. When `shuffled` is set, each observation is synthesized on a
// fresh seeded permutation of the layout (the shuffle countermeasure).
Dataset make_key_dataset(const PipelineContext& ctx, const KeyLayout& layout,
                         int per_class, std::uint64_t seed,
                         bool shuffled = false);

// Zone dataset: per_zone observations at positions jittered uniformly inside
// each grid cell.
Dataset make_zone_dataset(const PipelineContext& ctx, const GridSpec& grid,
                          int per_zone, std::uint64_t seed);

// Session generation for the interaction task.
TouchSession make_session(SessionKind kind, const DeviceProfile& profile,
                          double seconds, std::uint64_t seed);

// Behavioral feature dataset over generated sessions (closed loop: sessions
// are synthesized, re-intercepted, and featurized).
void make_interaction_data(const PipelineContext& ctx, int per_class,
                           std::uint64_t seed,
                           std::vector<std::vector<double>>* features,
                           std::vector<int>* labels,
                           std::vector<std::string>* class_names);

// Train the scenario's classifier on a prepared dataset.
nn::Model train_scenario_model(const Scenario& sc, const Dataset& train,
                               std::uint64_t seed);

// Full run: synthesize, intercept, normalize, train, attack, report.
Report run_end_to_end(const Scenario& sc, std::uint64_t master_seed);

}  // namespace scanleak
