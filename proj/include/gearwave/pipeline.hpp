#pragma once

// End-to-end stages behind the command-line tool: synthesize recordings,
// extract scale-distribution features, train and apply the classifier, and
// compare the two optimizers.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gearwave/config.hpp"
#include "gearwave/error.hpp"
#include "gearwave/exact_wavelet.hpp"
#include "gearwave/features.hpp"
#include "gearwave/random.hpp"
#include "gearwave/signal.hpp"
#include "gearwave/svm.hpp"

namespace gearwave {

// Seed streams derived from the configuration seed.
namespace streams {
inline constexpr std::uint64_t healthy_signal = 100;
inline constexpr std::uint64_t chipped_signal = 101;
inline constexpr std::uint64_t extraction = 200;
inline constexpr std::uint64_t split = 300;
inline constexpr std::uint64_t comparison = 400;
}  // namespace streams

inline int class_label(GearCondition c) { return c == GearCondition::chipped ? 1 : -1; }
inline GearCondition condition_of(int label) {
  return label > 0 ? GearCondition::chipped : GearCondition::healthy;
}

/// One continuous recording holding `frames` frames of the given condition.
inline Signal synthesize_recording(const SynthSource& source, std::size_t frame_length,
                                   GearCondition condition, std::size_t frames, std::uint64_t seed) {
  auto gearbox = source.gearbox;
  if (condition == GearCondition::healthy) gearbox.impulse_amplitude = 0.0;
  gearbox.duration_s = static_cast<double>(frames * frame_length) / gearbox.sample_rate_hz;
  gearbox.rng_seed = derive_seed(seed, condition == GearCondition::healthy ? streams::healthy_signal
                                                                          : streams::chipped_signal);
  return synthesize_gearbox(gearbox);
}

// Manifest CSV: segment_id,file,label,seed,start_index,length

struct ManifestEntry {
  std::string segment_id;
  std::string file;
  GearCondition label = GearCondition::healthy;
  std::uint64_t seed = 0;
  std::size_t start_index = 0;
  std::size_t length = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline void write_manifest(std::ostream& out, std::span<const ManifestEntry> entries) {
  out << "segment_id,file,label,seed,start_index,length\n";
  for (const auto& e : entries) {
    out << e.segment_id << ',' << e.file << ',' << to_string(e.label) << ',' << e.seed << ','
        << e.start_index << ',' << e.length << '\n';
  }
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::string line;
  if (!detail::next_csv_line(in, line) || line != "segment_id,file,label,seed,start_index,length")
    throw ParseError("manifest header must be segment_id,file,label,seed,start_index,length", 1);
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  auto number = [&](const std::string& text, auto& out) {
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size())
      throw ParseError("bad number '" + text + "' in manifest", line_no);
  };
  while (detail::next_csv_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 6) throw ParseError("manifest rows need 6 fields", line_no);
    ManifestEntry e;
    e.segment_id = f[0];
    e.file = f[1];
    const auto label = parse_condition(f[2]);
    if (!label) throw ParseError("unknown label '" + f[2] + "'", line_no);
    e.label = *label;
    number(f[3], e.seed);
    number(f[4], e.start_index);
    number(f[5], e.length);
    if (e.length == 0) throw ParseError("segment length must be positive", line_no);
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  return read_manifest(in);
}

/// Writes healthy.txt / chipped.txt (one per non-empty class) and
/// manifest.csv into `out_dir`, returning the manifest rows.
inline std::vector<ManifestEntry> run_synth(const PipelineConfig& config,
                                            const std::filesystem::path& out_dir) {
  const auto* source = std::get_if<SynthSource>(&config.source);
  if (!source) throw ConfigError("synth needs a [synth] configuration section");
  std::filesystem::create_directories(out_dir);

  std::vector<ManifestEntry> entries;
  for (auto condition : {GearCondition::healthy, GearCondition::chipped}) {
    const std::size_t frames =
        condition == GearCondition::healthy ? source->healthy_frames : source->chipped_frames;
    if (frames == 0) continue;
    const auto signal = synthesize_recording(*source, config.frame_length, condition, frames, config.seed);
    const std::string file = std::string(to_string(condition)) + ".txt";
    save_signal(out_dir / file, signal);
    for (std::size_t k = 0; k < frames; ++k) {
      entries.push_back({std::string(to_string(condition)) + "_" + std::to_string(k), file, condition,
                         config.seed, k * config.frame_length, config.frame_length});
    }
  }
  std::ofstream out(out_dir / "manifest.csv");
  if (!out) throw Error("cannot write manifest in '" + out_dir.string() + "'");
  write_manifest(out, entries);
  return entries;
}

/// A frame to featurize: samples plus identity.
struct LabeledFrame {
  std::string frame_id;
  std::optional<GearCondition> label;
  Frame frame;
};

/// Features for each frame, in input order. Frame k is scanned with base
/// seed derive_seed(derive_seed(seed, extraction), k).
inline std::vector<FeatureVector> extract_all(const PipelineConfig& config,
                                              std::span<const LabeledFrame> frames, unsigned threads = 1,
                                              std::ostream* log = nullptr) {
  const std::uint64_t base = derive_seed(config.seed, streams::extraction);
  std::vector<FeatureVector> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    out.push_back(extract_features(frames[k].frame, config.optimizer(derive_seed(base, k)),
                                   frames[k].frame_id, frames[k].label, threads, config.n_bins));
    if (log) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      *log << "frame " << frames[k].frame_id << ": " << frames[k].frame.length() << " samples in "
           << secs << " s\n";
    }
  }
  return out;
}

/// Loads the signal files named by `entries` (relative to `base_dir`) and
/// slices out each segment. Signals stay alive in `storage`.
inline std::vector<LabeledFrame> frames_from_manifest(std::span<const ManifestEntry> entries,
                                                      const std::filesystem::path& base_dir,
                                                      double sample_rate_hz,
                                                      std::map<std::string, Signal>& storage) {
  std::vector<LabeledFrame> frames;
  for (const auto& e : entries) {
    auto it = storage.find(e.file);
    if (it == storage.end())
      it = storage.emplace(e.file, load_signal(base_dir / e.file, sample_rate_hz)).first;
    const Signal& s = it->second;
    if (e.start_index + e.length > s.size())
      throw Error("segment '" + e.segment_id + "' runs past the end of '" + e.file + "'");
    frames.push_back({e.segment_id, e.label, {e.start_index, s.samples().subspan(e.start_index, e.length)}});
  }
  return frames;
}

inline LabeledDataset to_dataset(std::span<const FeatureVector> rows) {
  LabeledDataset data;
  for (const auto& r : rows) {
    if (!r.label) throw Error("feature row '" + r.frame_id + "' has no label");
    data.add(std::vector<double>(r.bin_counts.begin(), r.bin_counts.end()), class_label(*r.label));
  }
  return data;
}

struct TrainReport {
  SvmModel model;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  Evaluation train;
  std::optional<Evaluation> test;
};

/// Seeded shuffle, split, standardize on the training part, train, score.
inline TrainReport run_train(const PipelineConfig& config, std::span<const FeatureVector> rows,
                             const KernelSpec& kernel, double box_c) {
  if (config.train_count + config.test_count > rows.size()) {
    throw Error("split " + std::to_string(config.train_count) + "/" + std::to_string(config.test_count) +
                " needs more than the " + std::to_string(rows.size()) + " available rows");
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, streams::split));
  shuffle(order, rng);

  TrainReport report;
  report.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.train_count));
  report.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(config.train_count),
                          order.begin() + static_cast<std::ptrdiff_t>(config.train_count + config.test_count));

  auto subset = [&](const std::vector<std::size_t>& idx) {
    std::vector<FeatureVector> picked;
    for (auto i : idx) picked.push_back(rows[i]);
    return to_dataset(picked);
  };
  const auto train_data = subset(report.train_rows);
  report.model = train_standardized(train_data, kernel, box_c);
  report.train = evaluate(report.model, train_data);
  if (!report.test_rows.empty()) report.test = evaluate(report.model, subset(report.test_rows));
  return report;
}

inline TrainReport run_train(const PipelineConfig& config, std::span<const FeatureVector> rows) {
  return run_train(config, rows, config.kernel, config.box_c);
}

inline void write_evaluation(std::ostream& out, const std::string& name, const Evaluation& ev) {
  out << name << ": " << ev.total << " rows, accuracy " << 100.0 * ev.accuracy << "%\n"
      << "  confusion (rows actual, cols predicted: healthy chipped)\n"
      << "    healthy " << ev.confusion[0][0] << ' ' << ev.confusion[0][1] << '\n'
      << "    chipped " << ev.confusion[1][0] << ' ' << ev.confusion[1][1] << '\n';
}

struct Prediction {
  std::string frame_id;
  GearCondition label;
  double decision_value;
};

inline std::vector<Prediction> run_predict(const SvmModel& model, std::span<const FeatureVector> rows) {
  std::vector<Prediction> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::vector<double> x(r.bin_counts.begin(), r.bin_counts.end());
    const double f = decision_value(model, x);
    out.push_back({r.frame_id, condition_of(f >= 0.0 ? 1 : -1), f});
  }
  return out;
}

inline void write_predictions(std::ostream& out, std::span<const Prediction> preds) {
  out << "frame_id,predicted_label,decision_value\n";
  char buf[32];
  for (const auto& p : preds) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.decision_value);
    out << p.frame_id << ',' << to_string(p.label) << ',' << std::string_view(buf, end - buf) << '\n';
  }
}

// Comparison report CSV:
// translation,pso_scale,pso_fitness,pso_time_s,ga_scale,ga_fitness,ga_time_s

struct ComparisonRow {
  std::size_t translation = 0;
  double pso_scale = 0.0, pso_fitness = 0.0, pso_time_s = 0.0;
  double ga_scale = 0.0, ga_fitness = 0.0, ga_time_s = 0.0;
};

struct ComparisonSummary {
  double pso_total_s = 0.0;
  double ga_total_s = 0.0;
  double time_ratio = 0.0;  // GA / PSO
  double mean_abs_scale_diff = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  ComparisonSummary summary;
  std::vector<OptimResult> pso_runs, ga_runs;
};

/// Serial PSO and GA best-scale searches at `count` consecutive translations
/// from `start`. Both optimizers use the same per-translation seed; each call
/// is timed separately.
inline Comparison compare_optimizers(std::span<const double> signal, const SwarmConfig& pso,
                                     const GaConfig& ga, std::size_t start, std::size_t count,
                                     std::uint64_t seed) {
  if (count == 0) throw Error("comparison needs at least one translation");
  if (start + count > signal.size())
    throw Error("comparison translations run past the end of the signal");
  Comparison cmp;
  for (std::size_t b = start; b < start + count; ++b) {
    const std::uint64_t s = translation_seed(seed, b);
    ComparisonRow row;
    row.translation = b;

    OptimResult pso_run, ga_run;
    auto t0 = std::chrono::steady_clock::now();
    const auto p = best_scale_at(signal, b, with_seed(pso, s), &pso_run);
    auto t1 = std::chrono::steady_clock::now();
    const auto g = best_scale_at(signal, b, with_seed(ga, s), &ga_run);
    auto t2 = std::chrono::steady_clock::now();

    row.pso_scale = p.scale;
    row.pso_fitness = p.fitness;
    row.pso_time_s = std::chrono::duration<double>(t1 - t0).count();
    row.ga_scale = g.scale;
    row.ga_fitness = g.fitness;
    row.ga_time_s = std::chrono::duration<double>(t2 - t1).count();
    cmp.summary.pso_total_s += row.pso_time_s;
    cmp.summary.ga_total_s += row.ga_time_s;
    cmp.summary.mean_abs_scale_diff += std::abs(row.pso_scale - row.ga_scale);
    cmp.rows.push_back(row);
    cmp.pso_runs.push_back(std::move(pso_run));
    cmp.ga_runs.push_back(std::move(ga_run));
  }
  cmp.summary.mean_abs_scale_diff /= static_cast<double>(count);
  cmp.summary.time_ratio = cmp.summary.ga_total_s / cmp.summary.pso_total_s;
  return cmp;
}

inline void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "translation,pso_scale,pso_fitness,pso_time_s,ga_scale,ga_fitness,ga_time_s\n";
  out.precision(17);
  for (const auto& r : cmp.rows) {
    out << r.translation << ',' << r.pso_scale << ',' << r.pso_fitness << ',' << r.pso_time_s << ','
        << r.ga_scale << ',' << r.ga_fitness << ',' << r.ga_time_s << '\n';
  }
}

inline void write_comparison_summary(std::ostream& out, const Comparison& cmp) {
  out << "translations: " << cmp.rows.size() << '\n'
      << "pso_total_time_s: " << cmp.summary.pso_total_s << '\n'
      << "ga_total_time_s: " << cmp.summary.ga_total_s << '\n'
      << "time_ratio_ga_over_pso: " << cmp.summary.time_ratio << '\n'
      << "mean_abs_scale_diff: " << cmp.summary.mean_abs_scale_diff << '\n';
}

}  // namespace gearwave
