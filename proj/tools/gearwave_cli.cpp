// gearwave: exact-wavelet gearbox fault detection from the command line.
//
//   gearwave synth               --config cfg.ini --out data/
//   gearwave extract             --config cfg.ini --manifest data/manifest.csv --out features.csv
//   gearwave train               --config cfg.ini --features features.csv --out model.json
//   gearwave predict             --model model.json --features features.csv --out labels.csv
//   gearwave evaluate            --model model.json --features features.csv
//   gearwave compare-optimizers  --config cfg.ini --manifest data/manifest.csv --out compare.csv

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gearwave/gearwave.hpp"

namespace fs = std::filesystem;
using namespace gearwave;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

PipelineConfig resolve_config(const CommonOptions& opts) {
  PipelineConfig cfg = opts.config_path.empty() ? PipelineConfig{} : load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

std::vector<FeatureVector> read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file '" + path + "'");
  return read_feature_csv(in);
}

/// Frames from --manifest, --signal, or the configuration's [input] section.
struct FrameSource {
  std::map<std::string, Signal> signals;
  std::vector<LabeledFrame> frames;
};

void load_frames(FrameSource& src, const PipelineConfig& cfg, const std::string& manifest,
                 const std::string& signal_path, const std::string& label_text) {
  if (!manifest.empty()) {
    const auto entries = load_manifest(manifest);
    src.frames = frames_from_manifest(entries, fs::path(manifest).parent_path(), cfg.sample_rate_hz(),
                                      src.signals);
    return;
  }

  std::string path = signal_path;
  std::optional<GearCondition> label;
  if (!label_text.empty()) {
    label = parse_condition(label_text);
    if (!label) throw Error("--label must be healthy or chipped");
  }
  if (path.empty()) {
    const auto* input = std::get_if<FileSource>(&cfg.source);
    if (!input) throw Error("give --manifest or --signal, or an [input] section in the configuration");
    path = input->file.string();
    if (!label) label = input->label;
  }

  const auto& signal = src.signals.emplace(path, load_signal(path, cfg.sample_rate_hz())).first->second;
  const std::string stem = fs::path(path).stem().string();
  const auto frames = frame_signal(signal, cfg.frame_length);
  for (std::size_t k = 0; k < frames.size(); ++k)
    src.frames.push_back({stem + "_" + std::to_string(k), label, frames[k]});
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Pipeline configuration (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Override the configuration seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact wavelet analysis and SVM classification for gearbox fault detection"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_path, manifest_path, signal_path, label_text, features_path, model_path, trace_path;
  unsigned threads = 1;
  bool sweep = false;

  auto* synth = app.add_subcommand("synth", "Write synthetic healthy/chipped recordings and a manifest");
  add_common(synth, common);
  synth->add_option("--out", out_path, "Output directory")->required();

  auto* extract = app.add_subcommand("extract", "Scale-distribution features for every frame");
  add_common(extract, common);
  extract->add_option("--manifest", manifest_path, "Manifest written by synth");
  extract->add_option("--signal", signal_path, "Single signal file, framed by frame_length");
  extract->add_option("--label", label_text, "Label for --signal frames (healthy|chipped)");
  extract->add_option("--out", out_path, "Feature CSV")->required();
  extract->add_option("--threads", threads, "Worker threads per frame")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Split, standardize, and train the SVM");
  add_common(train, common);
  train->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Model document (JSON)")->required();
  train->add_flag("--sweep", sweep, "Also report linear and RBF sigma 0.5/1.0/1.5 on the same split");

  auto* predict = app.add_subcommand("predict", "Label feature rows with a trained model");
  predict->add_option("--model", model_path, "Model document")->required()->check(CLI::ExistingFile);
  predict->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out_path, "Predictions CSV (default: stdout)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "predict, then score against the CSV labels");
  evaluate_cmd->add_option("--model", model_path, "Model document")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--features", features_path, "Labelled feature CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", out_path, "Predictions CSV");

  auto* compare = app.add_subcommand("compare-optimizers", "PSO vs GA best-scale search on one frame");
  add_common(compare, common);
  compare->add_option("--manifest", manifest_path, "Manifest; the first chipped segment is used");
  compare->add_option("--signal", signal_path, "Signal file; its first frame is used");
  compare->add_option("--out", out_path, "Comparison CSV")->required();
  compare->add_option("--trace", trace_path, "Per-generation optimizer traces CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto cfg = resolve_config(common);
      const auto entries = run_synth(cfg, out_path);
      if (entries.empty()) std::cerr << "warning: no frames requested, manifest is empty\n";
      std::cout << "wrote " << entries.size() << " segments to " << (fs::path(out_path) / "manifest.csv").string()
                << '\n';
    } else if (extract->parsed()) {
      const auto cfg = resolve_config(common);
      FrameSource src;
      load_frames(src, cfg, manifest_path, signal_path, label_text);
      const auto rows = extract_all(cfg, src.frames, threads, &std::cerr);
      auto out = open_output(out_path);
      write_feature_csv(out, rows, cfg.n_bins);
      std::cout << "wrote " << rows.size() << " feature rows to " << out_path << '\n';
    } else if (train->parsed()) {
      const auto cfg = resolve_config(common);
      const auto rows = read_features(features_path);
      const auto report = run_train(cfg, rows);
      save_model(out_path, report.model);
      std::cout << "split: " << report.train_rows.size() << " train, " << report.test_rows.size() << " test\n"
                << "support vectors: " << report.model.support_vectors.size() << '\n';
      write_evaluation(std::cout, "train", report.train);
      if (report.test) write_evaluation(std::cout, "test", *report.test);
      if (sweep) {
        std::cout << "\nkernel        train%   test%\n";
        const std::vector<std::pair<std::string, KernelSpec>> kernels{
            {"rbf s=0.5", KernelSpec::rbf(0.5)}, {"rbf s=1.0", KernelSpec::rbf(1.0)},
            {"rbf s=1.5", KernelSpec::rbf(1.5)}, {"linear", KernelSpec::linear()}};
        for (const auto& [name, kernel] : kernels) {
          const auto r = run_train(cfg, rows, kernel, cfg.box_c);
          std::cout << name << std::string(14 - name.size(), ' ') << 100.0 * r.train.accuracy << "   "
                    << (r.test ? std::to_string(100.0 * r.test->accuracy) : std::string("-")) << '\n';
        }
      }
    } else if (predict->parsed() || evaluate_cmd->parsed()) {
      const auto model = load_model(model_path);
      const auto rows = read_features(features_path);
      const auto preds = run_predict(model, rows);
      if (!out_path.empty()) {
        auto out = open_output(out_path);
        write_predictions(out, preds);
      } else if (predict->parsed()) {
        write_predictions(std::cout, preds);
      }
      if (evaluate_cmd->parsed()) {
        if (rows.empty()) throw Error("cannot evaluate an empty feature file");
        write_evaluation(std::cout, "evaluation", evaluate(model, to_dataset(rows)));
      }
    } else if (compare->parsed()) {
      const auto cfg = resolve_config(common);
      FrameSource src;
      load_frames(src, cfg, manifest_path, signal_path, "");
      if (src.frames.empty()) throw Error("no frames available for comparison");
      auto chosen = std::find_if(src.frames.begin(), src.frames.end(),
                                 [](const LabeledFrame& f) { return f.label == GearCondition::chipped; });
      if (chosen == src.frames.end()) chosen = src.frames.begin();

      auto pso = cfg.pso;
      auto ga = cfg.ga;
      const auto cmp = compare_optimizers(chosen->frame.samples, pso, ga, cfg.compare_start,
                                          cfg.compare_translations,
                                          derive_seed(cfg.seed, streams::comparison));
      auto out = open_output(out_path);
      write_comparison_csv(out, cmp);
      if (!trace_path.empty()) {
        auto trace = open_output(trace_path);
        trace << "optimizer,translation,generation,gb_fitness,evaluations,elapsed_s\n";
        for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
          for (const auto& [name, run] : {std::pair{"pso", &cmp.pso_runs[i]}, std::pair{"ga", &cmp.ga_runs[i]}}) {
            for (const auto& row : run->trace) {
              trace << name << ',' << cmp.rows[i].translation << ',' << row.generation << ','
                    << row.best_fitness << ',' << row.evaluations << ',' << row.elapsed_s << '\n';
            }
          }
        }
      }
      std::cout << "frame: " << chosen->frame_id << '\n';
      write_comparison_summary(std::cout, cmp);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
