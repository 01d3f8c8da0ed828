#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gearwave/gearwave.hpp"
#include "oracles.hpp"

using namespace gearwave;
namespace fs = std::filesystem;

namespace {

PipelineConfig config_from(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gearwave_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

FeatureVector row(std::string id, GearCondition label, std::uint32_t a, std::uint32_t b) {
  FeatureVector f;
  f.frame_id = std::move(id);
  f.label = label;
  f.bin_counts = {a, b};
  return f;
}

std::vector<FeatureVector> separable_rows(std::size_t per_class) {
  std::vector<FeatureVector> rows;
  Rng rng(5);
  for (std::size_t i = 0; i < per_class; ++i) {
    rows.push_back(row("h" + std::to_string(i), GearCondition::healthy, 10 + rng.below(5), 40 + rng.below(5)));
    rows.push_back(row("c" + std::to_string(i), GearCondition::chipped, 40 + rng.below(5), 10 + rng.below(5)));
  }
  return rows;
}

}  // namespace

TEST_CASE("empty configuration yields defaults", "[config]") {
  const auto cfg = config_from("");
  CHECK(cfg.seed == 0);
  CHECK(cfg.frame_length == 1250);
  CHECK(cfg.n_bins == 16);
  CHECK(cfg.optimizer_kind == OptimizerKind::pso);
  CHECK(cfg.pso.population == 20);
  CHECK(cfg.pso.max_generations == 50);
  CHECK(cfg.ga.population == 20);
  CHECK(std::isinf(cfg.box_c));
  CHECK(cfg.kernel.kind == KernelKind::linear);
  CHECK(cfg.train_count == 60);
  CHECK(cfg.test_count == 100);
  const auto& src = std::get<SynthSource>(cfg.source);
  CHECK(src.healthy_frames == 80);
  CHECK(src.chipped_frames == 80);
  CHECK(src.gearbox.shaft_speed_rpm == 1420.0);
}

TEST_CASE("configuration keys are applied", "[config]") {
  const auto cfg = config_from(
      "seed = 99\n"
      "[synth]\nnoise_std = 0.5\nhealthy_frames = 3\n"
      "[frames]\nframe_length = 400\n"
      "[optimizer]\nkind = ga\nupper_bound = 16\n"
      "[pso]\nmax_generations = 15\nv_max = inf\n"
      "[ga]\nelite_count = 2\n"
      "[svm]\nkernel = rbf\nsigma = 1.5\nbox_c = 10\n"
      "[split]\ntrain_count = 4\ntest_count = 2\n"
      "[compare]\ntranslations = 5\nstart = 7\n");
  CHECK(cfg.seed == 99);
  CHECK(std::get<SynthSource>(cfg.source).gearbox.noise_std == 0.5);
  CHECK(std::get<SynthSource>(cfg.source).healthy_frames == 3);
  CHECK(cfg.frame_length == 400);
  CHECK(cfg.optimizer_kind == OptimizerKind::ga);
  CHECK(cfg.pso.upper_bound == 16.0);
  CHECK(cfg.ga.upper_bound == 16.0);
  CHECK(cfg.pso.max_generations == 15);
  CHECK(std::isinf(cfg.pso.v_max));
  CHECK(cfg.ga.elite_count == 2);
  CHECK(cfg.kernel == KernelSpec::rbf(1.5));
  CHECK(cfg.box_c == 10.0);
  CHECK(cfg.compare_translations == 5);
  CHECK(cfg.compare_start == 7);
  CHECK(std::holds_alternative<GaConfig>(cfg.optimizer(3)));
  CHECK(std::get<GaConfig>(cfg.optimizer(3)).rng_seed == 3);
}

TEST_CASE("bad configurations are rejected", "[config]") {
  CHECK_THROWS_AS(config_from("[synth]\nnoise = 1\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[wavelet]\nscale = 1\n"), ConfigError);
  CHECK_THROWS_AS(config_from("sed = 1\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[frames]\nframe_length = ten\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[frames]\nframe_length = 0\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[svm]\nkernel = poly\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[svm]\nkernel = rbf\nsigma = -1\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[optimizer]\nkind = annealing\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[synth]\nnoise_std = 0\n[input]\nfile = x.txt\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[input]\nlabel = chipped\n"), ConfigError);
  CHECK_THROWS_AS(config_from("[synth]\nsample_rate_hz = 600\n"), ConfigError);  // 355 Hz mesh above Nyquist
  CHECK_THROWS_AS(config_from("[pso]\npopulation = 0\n"), ConfigError);
}

TEST_CASE("input file paths resolve against the configuration directory", "[config]") {
  const auto dir = scratch("config");
  {
    std::ofstream out(dir / "run.ini");
    out << "[input]\nfile = rec.txt\nsample_rate_hz = 5000\nlabel = healthy\n";
  }
  const auto cfg = load_config(dir / "run.ini");
  const auto& src = std::get<FileSource>(cfg.source);
  CHECK(src.file == dir / "rec.txt");
  CHECK(src.label == GearCondition::healthy);
  CHECK(cfg.sample_rate_hz() == 5000.0);
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), ConfigError);
}

TEST_CASE("manifest round trip and validation", "[pipeline][manifest]") {
  const std::vector<ManifestEntry> entries{{"healthy_0", "healthy.txt", GearCondition::healthy, 7, 0, 100},
                                           {"chipped_3", "chipped.txt", GearCondition::chipped, 7, 300, 100}};
  std::stringstream buf;
  write_manifest(buf, entries);
  CHECK(read_manifest(buf) == entries);

  std::istringstream bad_header("id,file\n");
  CHECK_THROWS_AS(read_manifest(bad_header), ParseError);
  std::istringstream bad_label("segment_id,file,label,seed,start_index,length\na,f.txt,broken,1,0,10\n");
  try {
    read_manifest(bad_label);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream zero_len("segment_id,file,label,seed,start_index,length\na,f.txt,healthy,1,0,0\n");
  CHECK_THROWS_AS(read_manifest(zero_len), ParseError);
}

TEST_CASE("synth writes one recording per class and a manifest", "[pipeline][synth]") {
  auto cfg = config_from("seed = 3\n[synth]\nhealthy_frames = 2\nchipped_frames = 3\n[frames]\nframe_length = 200\n");
  const auto dir = scratch("synth");
  const auto entries = run_synth(cfg, dir);
  REQUIRE(entries.size() == 5);
  CHECK(load_manifest(dir / "manifest.csv") == entries);
  CHECK(load_signal(dir / "healthy.txt", 10000).size() == 400);
  CHECK(load_signal(dir / "chipped.txt", 10000).size() == 600);
  CHECK(entries[3].start_index == 200);

  std::map<std::string, Signal> storage;
  const auto frames = frames_from_manifest(entries, dir, 10000, storage);
  CHECK(frames.size() == 5);
  CHECK(frames[4].frame.length() == 200);
  CHECK(frames[4].label == GearCondition::chipped);

  auto broken = entries;
  broken[0].start_index = 350;
  std::map<std::string, Signal> fresh;
  CHECK_THROWS_AS(frames_from_manifest(broken, dir, 10000, fresh), Error);

  auto none = cfg;
  std::get<SynthSource>(none.source).healthy_frames = 0;
  std::get<SynthSource>(none.source).chipped_frames = 0;
  const auto empty_dir = scratch("synth_empty");
  CHECK(run_synth(none, empty_dir).empty());
  CHECK(load_manifest(empty_dir / "manifest.csv").empty());
}

TEST_CASE("extraction is seeded per frame and conserves counts", "[pipeline][extract]") {
  auto cfg = config_from("seed = 4\n[synth]\nhealthy_frames = 1\nchipped_frames = 1\n"
                         "[frames]\nframe_length = 150\n[pso]\nmax_generations = 5\n");
  const auto dir = scratch("extract");
  const auto entries = run_synth(cfg, dir);
  std::map<std::string, Signal> storage;
  const auto frames = frames_from_manifest(entries, dir, 10000, storage);
  const auto rows = extract_all(cfg, frames);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) CHECK(r.total() == 150);
  CHECK(rows[1].label == GearCondition::chipped);
  CHECK(extract_all(cfg, frames, 3) == rows);
}

TEST_CASE("train split is seeded and bounded by the row count", "[pipeline][train]") {
  auto cfg = config_from("seed = 11\n[split]\ntrain_count = 20\ntest_count = 60\n");
  const auto rows = separable_rows(40);
  const auto a = run_train(cfg, rows);
  const auto b = run_train(cfg, rows);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.train_rows.size() == 20);
  REQUIRE(a.test);
  CHECK(a.test->total == 60);
  CHECK(a.train.accuracy == 1.0);
  CHECK(a.test->accuracy == 1.0);

  auto other = cfg;
  other.seed = 12;
  CHECK(run_train(other, rows).train_rows != a.train_rows);

  auto too_many = cfg;
  too_many.train_count = 81;
  too_many.test_count = 0;
  CHECK_THROWS_WITH(run_train(too_many, rows), Catch::Matchers::ContainsSubstring("81/0"));
  auto no_train = cfg;
  no_train.train_count = 0;
  CHECK_THROWS(run_train(no_train, rows));

  auto unlabeled = rows;
  unlabeled[0].label.reset();
  auto all = cfg;
  all.train_count = 80;
  all.test_count = 0;
  CHECK_THROWS_WITH(run_train(all, unlabeled), Catch::Matchers::ContainsSubstring("no label"));
}

TEST_CASE("predictions carry decision values and labels", "[pipeline][predict]") {
  auto cfg = config_from("[split]\ntrain_count = 40\ntest_count = 0\n");
  const auto rows = separable_rows(20);
  const auto report = run_train(cfg, rows);
  const auto preds = run_predict(report.model, rows);
  REQUIRE(preds.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(preds[i].frame_id == rows[i].frame_id);
    CHECK(preds[i].label == rows[i].label);
    CHECK((preds[i].decision_value >= 0) == (preds[i].label == GearCondition::chipped));
  }
  std::ostringstream out;
  write_predictions(out, preds);
  CHECK(out.str().rfind("frame_id,predicted_label,decision_value\nh0,healthy,-", 0) == 0);

  std::vector<FeatureVector> wrong{row("x", GearCondition::healthy, 1, 2)};
  wrong[0].bin_counts.push_back(3);
  CHECK_THROWS(run_predict(report.model, wrong));
}

TEST_CASE("optimizer comparison reports every translation", "[pipeline][compare]") {
  const auto signal = oracle::injected_daughter(400, 8.0, 200);
  SwarmConfig pso;
  pso.max_generations = 10;
  GaConfig ga;
  ga.max_generations = 10;
  const auto cmp = compare_optimizers(signal, pso, ga, 195, 10, 1);
  REQUIRE(cmp.rows.size() == 10);
  CHECK(cmp.rows.front().translation == 195);
  CHECK(cmp.pso_runs.size() == 10);
  CHECK(cmp.summary.time_ratio == cmp.summary.ga_total_s / cmp.summary.pso_total_s);
  std::ostringstream out;
  write_comparison_csv(out, cmp);
  CHECK(out.str().rfind("translation,pso_scale,pso_fitness,pso_time_s,ga_scale,ga_fitness,ga_time_s\n", 0) == 0);
  CHECK_THROWS(compare_optimizers(signal, pso, ga, 395, 10, 1));
  CHECK_THROWS(compare_optimizers(signal, pso, ga, 0, 0, 1));
}
