#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "scanleak/scenario.hpp"

using namespace scanleak;

namespace {

// Small, fast experiment: low probe rate, few observations, short training.
Scenario tiny_pin_scenario() {
  Scenario sc;
  sc.task = "pin";
  sc.profile = "iphone_x";
  sc.model = "mlp";
  sc.sample_rate = 8000.0;
  sc.snr = 30.0;
  sc.train_per_class = 8;
  sc.test_per_class = 3;
  sc.epochs = 2;
  sc.batch_size = 16;
  sc.seq_len = 2;
  sc.runs = 5;
  sc.k_list = {1, 3};
  return sc;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("the parser reads keys, comments, and defaults") {
  const Scenario sc = scenario_from_string(
      "# experiment header\n"
      "task = keyboard\n"
      "profile = xiaomi_10_pro   # fastest report rate\n"
      "snr = 12.5\n"
      "\n"
      "k_list = 1, 5, 10\n"
      "chars = abc\n");
  CHECK(sc.task == "keyboard");
  CHECK(sc.profile == "xiaomi_10_pro");
  CHECK(sc.snr == 12.5);
  CHECK(sc.k_list == std::vector<int>{1, 5, 10});
  CHECK(sc.chars == "abc");
  // Untouched keys keep their defaults.
  CHECK(sc.model == "mlp");
  CHECK(sc.countermeasure == "none");
  CHECK(sc.sample_rate == 20000.0);
  CHECK(sc.distance == 0.05);
  CHECK(sc.train_per_class == 200);
}

TEST_CASE("parse failures name the origin and line") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      scenario_from_string(text, "exp.scenario");
      FAIL("expected DomainError for: " << text);
    } catch (const DomainError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("exp.scenario") != std::string::npos);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };
  fails_with("task = pin\nbananas\n", "exp.scenario:2");
  fails_with("frobnicate = 1\n", "unknown scenario key");
  fails_with("snr = fast\n", "expected a number");
  fails_with("epochs = 2.5\n", "expected an integer");
  fails_with("snr = 10 junk\n", "trailing junk");
  fails_with("k_list = \n", "empty list");
  fails_with(" = 3\n", "empty key");
}

TEST_CASE("validation rejects inconsistent experiments") {
  auto broken = [](auto&& mutate) {
    Scenario sc;
    mutate(sc);
    CHECK_THROWS_AS(sc.validate(), DomainError);
  };
  broken([](Scenario& s) { s.task = "espionage"; });
  broken([](Scenario& s) { s.model = "svm"; });
  broken([](Scenario& s) { s.countermeasure = "prayer"; });
  broken([](Scenario& s) { s.task = "interaction"; s.countermeasure = "shuffle"; });
  broken([](Scenario& s) { s.snr = -3.0; });
  broken([](Scenario& s) { s.distance = 0.0; });
  broken([](Scenario& s) { s.rx_leak_gain = 1.5; });
  broken([](Scenario& s) { s.epochs = 0; });
  broken([](Scenario& s) { s.k_list = {}; });
  broken([](Scenario& s) { s.k_list = {1, 0}; });
  broken([](Scenario& s) { s.smooth_window = 10; });
  broken([](Scenario& s) { s.session_seconds = 5.0; });
  broken([](Scenario& s) { s.chars = "a~b"; });

  Scenario ok;
  CHECK_NOTHROW(ok.validate());
  ok.task = "pin";
  ok.countermeasure = "shuffle";
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("scenario files load like inline text") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scanleak_test_scenario";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path p = dir / "exp.scenario";
  {
    std::ofstream out(p);
    out << "task = zones\ngrid_cols = 5\ngrid_rows = 8\n";
  }
  const Scenario sc = load_scenario(p.string());
  CHECK(sc.task == "zones");
  CHECK(sc.grid_cols == 5);
  CHECK(sc.grid_rows == 8);
  CHECK_THROWS_AS(load_scenario((dir / "absent.scenario").string()), FileError);
  fs::remove_all(dir);
}

TEST_CASE("the context derives noise, windows, and input length") {
  Scenario sc = tiny_pin_scenario();
  const PipelineContext ctx = make_context(sc, 42);

  CHECK(ctx.profile.name == "iphone_x");
  CHECK(ctx.distance == sc.distance);
  CHECK(ctx.input_len ==
        static_cast<std::size_t>(
            std::ceil(sc.sample_rate / ctx.profile.scan.f_touch)));

  // Noise floor honors the requested amplitude SNR at the working distance.
  const double amp = reference_amplitude(ctx.profile, sc.distance, ctx.synth);
  CHECK(ctx.noise.gaussian_sigma == doctest::Approx(amp / sc.snr));
  CHECK(ctx.noise.mains_amp ==
        doctest::Approx(0.25 * ctx.noise.gaussian_sigma));
  CHECK(ctx.noise.seed == 42);

  // snr = 0 means a noiseless bench.
  sc.snr = 0.0;
  CHECK(make_context(sc, 42).noise.is_silent());

  // rx_leak_gain < 0 keeps the handset's own value; >= 0 overrides it.
  sc.rx_leak_gain = -1.0;
  CHECK(make_context(sc, 42).profile.rx_leak_gain ==
        builtin_profile("iphone_x").rx_leak_gain);
  sc.rx_leak_gain = 0.4;
  CHECK(make_context(sc, 42).profile.rx_leak_gain == 0.4);

  // Detector window measured against threshold calibration.
  CHECK_NOTHROW(ctx.seg.validate());
  CHECK(ctx.seg.w >= 8);

  sc = tiny_pin_scenario();
  sc.sample_rate = 500.0;  // one report frame would be ~4 samples
  CHECK_THROWS_AS(make_context(sc, 42), DomainError);
}

TEST_CASE("key observations are seeded and sized") {
  const Scenario sc = tiny_pin_scenario();
  const PipelineContext ctx = make_context(sc, 7);
  const KeyLayout pad = digit_pad_layout(ctx.profile);

  const auto a = observe_key(ctx, pad, "5", 1001);
  const auto b = observe_key(ctx, pad, "5", 1001);
  const auto c = observe_key(ctx, pad, "5", 1002);
  CHECK(a.size() == ctx.input_len);
  CHECK(a == b);
  CHECK(a != c);
  CHECK_THROWS_AS(observe_key(ctx, pad, "F", 1001), DomainError);
}

TEST_CASE("key datasets are balanced and reproducible") {
  const Scenario sc = tiny_pin_scenario();
  const PipelineContext ctx = make_context(sc, 7);
  const KeyLayout pad = digit_pad_layout(ctx.profile);

  const Dataset d = make_key_dataset(ctx, pad, 3, 55);
  CHECK(d.size() == 30);
  CHECK(d.x.shape == std::vector<std::size_t>{30, ctx.input_len});
  CHECK(d.class_names == pad.keys);
  std::map<int, int> counts;
  for (int y : d.y) ++counts[y];
  for (int c = 0; c < 10; ++c) CHECK(counts[c] == 3);

  const Dataset again = make_key_dataset(ctx, pad, 3, 55);
  CHECK(again.x.data == d.x.data);
  CHECK(again.y == d.y);
  const Dataset moved = make_key_dataset(ctx, pad, 3, 56);
  CHECK(moved.x.data != d.x.data);

  // The shuffled variant still fills every class but sees different signals
  // because key positions move under each observation.
  const Dataset shuffled = make_key_dataset(ctx, pad, 3, 55, true);
  CHECK(shuffled.size() == 30);
  CHECK(shuffled.x.data != d.x.data);
}

TEST_CASE("zone datasets cover the grid") {
  Scenario sc = tiny_pin_scenario();
  sc.task = "zones";
  const PipelineContext ctx = make_context(sc, 7);
  GridSpec grid;
  grid.cols = 3;
  grid.rows = 4;
  grid.screen_w = ctx.profile.screen_w;
  grid.screen_h = ctx.profile.screen_h;

  const Dataset d = make_zone_dataset(ctx, grid, 2, 77);
  CHECK(d.size() == 24);
  CHECK(d.x.shape == std::vector<std::size_t>{24, ctx.input_len});
  CHECK(d.class_names.size() == 12);
  std::map<int, int> counts;
  for (int y : d.y) ++counts[y];
  for (int z = 0; z < 12; ++z) CHECK(counts[z] == 2);
}

TEST_CASE("session rhythms separate the three behaviors") {
  const DeviceProfile profile = builtin_profile("iphone_x");
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const TouchSession unlock =
        make_session(SessionKind::screen_unlock, profile, 30.0, seed);
    const TouchSession typing =
        make_session(SessionKind::keyboard_input, profile, 30.0, seed);
    const TouchSession app =
        make_session(SessionKind::app_operation, profile, 30.0, seed);

    // Typing is the densest, app use the sparsest, and unlocks stop early.
    CHECK(typing.entries.size() > app.entries.size());
    CHECK(typing.entries.size() > unlock.entries.size());
    CHECK(unlock.entries.size() >= 4);
    CHECK(unlock.entries.back().onset < 10.0);

    for (const TouchSession* s : {&unlock, &typing, &app}) {
      CHECK(s->duration == 30.0);
      for (std::size_t i = 1; i < s->entries.size(); ++i)
        CHECK(s->entries[i].onset > s->entries[i - 1].onset);
      if (!s->entries.empty()) {
        const auto& last = s->entries.back();
        CHECK(last.onset + last.event.t_contact < 30.0);
      }
    }
  }
  CHECK(make_session(SessionKind::screen_unlock, profile, 30.0, 3).entries.size() ==
        make_session(SessionKind::screen_unlock, profile, 30.0, 3).entries.size());
  CHECK_THROWS_AS(make_session(SessionKind::handwriting, profile, 30.0, 1),
                  DomainError);
  CHECK_THROWS_AS(make_session(SessionKind::screen_unlock, profile, 1.0, 1),
                  DomainError);
}

TEST_CASE("a small end-to-end run reproduces its report byte for byte") {
  const Scenario sc = tiny_pin_scenario();
  const Report r1 = run_end_to_end(sc, 2026);

  CHECK(r1.task == "pin");
  CHECK(r1.class_names.size() == 10);
  CHECK(r1.confusion.size() == 10);
  int test_total = 0;
  for (const auto& row : r1.confusion)
    for (int v : row) test_total += v;
  CHECK(test_total == 30);
  CHECK(r1.accuracy >= 0.0);
  CHECK(r1.accuracy <= 1.0);
  REQUIRE(r1.top_k.count(1) == 1);
  REQUIRE(r1.top_k.count(3) == 1);
  CHECK(r1.top_k.at(1) <= r1.top_k.at(3));
  CHECK(!r1.metadata.empty());

  const Report r2 = run_end_to_end(sc, 2026);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scanleak_test_e2e";
  fs::remove_all(dir);
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  emit_report(r1, (dir / "a").string());
  emit_report(r2, (dir / "b").string());
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "confusion.csv") == slurp(dir / "b" / "confusion.csv"));
  CHECK(slurp(dir / "a" / "topk.csv") == slurp(dir / "b" / "topk.csv"));
  fs::remove_all(dir);
}

}  // TEST_SUITE
