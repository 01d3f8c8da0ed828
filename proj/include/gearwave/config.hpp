#pragma once

// Pipeline configuration document: INI-style sections of key = value pairs.
//
//   seed = 7
//   [synth]       shaft_speed_rpm driver_teeth driven_teeth sample_rate_hz
//                 mesh_amplitude impulse_amplitude impulse_decay_rate
//                 impulse_scale noise_std healthy_frames chipped_frames
//   [input]       file sample_rate_hz label           (instead of [synth])
//   [frames]      frame_length
//   [optimizer]   kind (pso|ga) lower_bound upper_bound
//   [pso]         c1 c2 v_max inertia_start inertia_end population
//                 max_generations stall_time_limit_s time_limit_s
//   [ga]          population elite_count mutation_probability
//                 crossover_fraction max_generations fitness_tolerance
//                 stall_generations
//   [features]    n_bins
//   [svm]         kernel (linear|rbf) sigma box_c (number or inf)
//   [split]       train_count test_count
//   [compare]     translations start
//
// Every key is optional and defaults to the values below. Unknown sections
// or keys are rejected.

#include <cctype>
#include <charconv>
#include <limits>
#include <type_traits>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gearwave/error.hpp"
#include "gearwave/exact_wavelet.hpp"
#include "gearwave/features.hpp"
#include "gearwave/optim.hpp"
#include "gearwave/signal.hpp"
#include "gearwave/svm.hpp"

namespace gearwave {

struct SynthSource {
  SynthConfig gearbox{.impulse_amplitude = 2.5};  // impulse used for chipped frames
  std::size_t healthy_frames = 80;
  std::size_t chipped_frames = 80;
};

struct FileSource {
  std::filesystem::path file;
  double sample_rate_hz = 10000.0;
  std::optional<GearCondition> label;
};

enum class OptimizerKind { pso, ga };

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::variant<SynthSource, FileSource> source = SynthSource{};
  std::size_t frame_length = 1250;
  OptimizerKind optimizer_kind = OptimizerKind::pso;
  SwarmConfig pso;
  GaConfig ga;
  std::size_t n_bins = kDefaultBins;
  KernelSpec kernel = KernelSpec::linear();
  double box_c = kUnboundedC;
  std::size_t train_count = 60;
  std::size_t test_count = 100;
  std::size_t compare_translations = 20;
  std::size_t compare_start = 0;

  /// The selected optimizer, seeded with `seed`.
  OptimizerConfig optimizer(std::uint64_t seed_override) const {
    if (optimizer_kind == OptimizerKind::pso) {
      auto c = pso;
      c.rng_seed = seed_override;
      return c;
    }
    auto c = ga;
    c.rng_seed = seed_override;
    return c;
  }

  double sample_rate_hz() const {
    if (const auto* s = std::get_if<SynthSource>(&source)) return s->gearbox.sample_rate_hz;
    return std::get<FileSource>(source).sample_rate_hz;
  }

  void validate() const {
    if (frame_length == 0) throw ConfigError("frame_length must be positive");
    if (n_bins == 0) throw ConfigError("n_bins must be positive");
    pso.validate();
    ga.validate();
    kernel.validate();
    if (!(box_c > 0.0)) throw ConfigError("box_c must be positive");
    if (const auto* s = std::get_if<SynthSource>(&source)) {
      auto probe = s->gearbox;
      probe.duration_s = static_cast<double>(frame_length) / probe.sample_rate_hz;
      probe.validate();
    } else if (!(std::get<FileSource>(source).sample_rate_hz > 0.0)) {
      throw ConfigError("input sample_rate_hz must be positive");
    }
  }
};

namespace detail {

class SectionReader {
 public:
  SectionReader(const boost::property_tree::ptree& tree, std::string section)
      : tree_(tree), section_(std::move(section)) {}

  template <class T>
  void read(const std::string& key, T& value) {
    seen_.insert(key);
    const auto raw = tree_.get_optional<std::string>(key);
    if (!raw) return;
    value = parse<T>(key, *raw);
  }

  /// Rejects keys that were never read; `sections` names are skipped.
  void finish(const std::set<std::string>& sections = {}) const {
    for (const auto& [key, child] : tree_) {
      if (!child.empty() || sections.count(key)) continue;
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in " + where());
    }
  }

 private:
  std::string where() const { return section_.empty() ? "top level" : "[" + section_ + "]"; }

  template <class T>
  T parse(const std::string& key, std::string text) const {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    const auto fail = [&] {
      return ConfigError("bad value '" + text + "' for key '" + key + "' in " + where());
    };
    if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, std::filesystem::path>) {
      return T(text);
    } else {
      T value{};
      const char* first = text.data();
      const char* last = text.data() + text.size();
      if constexpr (std::is_floating_point_v<T>) {
        if (text == "inf" || text == "infinity") return std::numeric_limits<T>::infinity();
      }
      const auto [end, ec] = std::from_chars(first, last, value);
      if (text.empty() || ec != std::errc{} || end != last) throw fail();
      return value;
    }
  }

  const boost::property_tree::ptree& tree_;
  std::string section_;
  std::set<std::string> seen_;
};

inline const boost::property_tree::ptree& section_or_empty(const boost::property_tree::ptree& root,
                                                           const std::string& name) {
  static const boost::property_tree::ptree empty;
  const auto it = root.find(name);
  return it == root.not_found() ? empty : it->second;
}

}  // namespace detail

inline PipelineConfig parse_config(std::istream& in) {
  boost::property_tree::ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }

  static const std::set<std::string> sections{"synth", "input", "frames", "optimizer", "pso",
                                              "ga", "features", "svm", "split", "compare"};
  for (const auto& [name, child] : root) {
    if (!child.empty() && !sections.count(name))
      throw ConfigError("unknown section [" + name + "]");
  }
  if (root.find("synth") != root.not_found() && root.find("input") != root.not_found())
    throw ConfigError("configuration must contain only one of [synth] and [input]");

  PipelineConfig cfg;
  using detail::section_or_empty;
  {
    detail::SectionReader top(root, "");
    top.read("seed", cfg.seed);
    top.finish(sections);
  }
  if (root.find("input") != root.not_found()) {
    FileSource src;
    detail::SectionReader r(section_or_empty(root, "input"), "input");
    r.read("file", src.file);
    r.read("sample_rate_hz", src.sample_rate_hz);
    std::string label;
    r.read("label", label);
    r.finish();
    if (src.file.empty()) throw ConfigError("[input] requires a 'file' key");
    if (!label.empty()) {
      src.label = parse_condition(label);
      if (!src.label) throw ConfigError("[input] label must be healthy or chipped");
    }
    cfg.source = src;
  } else {
    SynthSource src;
    auto& g = src.gearbox;
    detail::SectionReader r(section_or_empty(root, "synth"), "synth");
    r.read("shaft_speed_rpm", g.shaft_speed_rpm);
    r.read("driver_teeth", g.driver_teeth);
    r.read("driven_teeth", g.driven_teeth);
    r.read("sample_rate_hz", g.sample_rate_hz);
    r.read("mesh_amplitude", g.mesh_amplitude);
    r.read("impulse_amplitude", g.impulse_amplitude);
    r.read("impulse_decay_rate", g.impulse_decay_rate);
    r.read("impulse_scale", g.impulse_scale);
    r.read("noise_std", g.noise_std);
    r.read("healthy_frames", src.healthy_frames);
    r.read("chipped_frames", src.chipped_frames);
    r.finish();
    cfg.source = src;
  }
  {
    detail::SectionReader r(section_or_empty(root, "frames"), "frames");
    r.read("frame_length", cfg.frame_length);
    r.finish();
  }
  {
    detail::SectionReader r(section_or_empty(root, "optimizer"), "optimizer");
    std::string kind = "pso";
    double lower = cfg.pso.lower_bound, upper = cfg.pso.upper_bound;
    r.read("kind", kind);
    r.read("lower_bound", lower);
    r.read("upper_bound", upper);
    r.finish();
    if (kind == "pso") {
      cfg.optimizer_kind = OptimizerKind::pso;
    } else if (kind == "ga") {
      cfg.optimizer_kind = OptimizerKind::ga;
    } else {
      throw ConfigError("[optimizer] kind must be pso or ga");
    }
    cfg.pso.lower_bound = cfg.ga.lower_bound = lower;
    cfg.pso.upper_bound = cfg.ga.upper_bound = upper;
  }
  {
    detail::SectionReader r(section_or_empty(root, "pso"), "pso");
    r.read("c1", cfg.pso.c1);
    r.read("c2", cfg.pso.c2);
    r.read("v_max", cfg.pso.v_max);
    r.read("inertia_start", cfg.pso.inertia_start);
    r.read("inertia_end", cfg.pso.inertia_end);
    r.read("population", cfg.pso.population);
    r.read("max_generations", cfg.pso.max_generations);
    r.read("stall_time_limit_s", cfg.pso.stall_time_limit_s);
    r.read("time_limit_s", cfg.pso.time_limit_s);
    r.finish();
  }
  {
    detail::SectionReader r(section_or_empty(root, "ga"), "ga");
    r.read("population", cfg.ga.population);
    r.read("elite_count", cfg.ga.elite_count);
    r.read("mutation_probability", cfg.ga.mutation_probability);
    r.read("crossover_fraction", cfg.ga.crossover_fraction);
    r.read("max_generations", cfg.ga.max_generations);
    r.read("fitness_tolerance", cfg.ga.fitness_tolerance);
    r.read("stall_generations", cfg.ga.stall_generations);
    r.finish();
  }
  {
    detail::SectionReader r(section_or_empty(root, "features"), "features");
    r.read("n_bins", cfg.n_bins);
    r.finish();
  }
  {
    detail::SectionReader r(section_or_empty(root, "svm"), "svm");
    std::string kernel = "linear";
    double sigma = 1.0;
    r.read("kernel", kernel);
    r.read("sigma", sigma);
    r.read("box_c", cfg.box_c);
    r.finish();
    if (kernel == "linear") {
      cfg.kernel = KernelSpec::linear();
    } else if (kernel == "rbf") {
      cfg.kernel = KernelSpec::rbf(sigma);
    } else {
      throw ConfigError("[svm] kernel must be linear or rbf");
    }
  }
  {
    detail::SectionReader r(section_or_empty(root, "split"), "split");
    r.read("train_count", cfg.train_count);
    r.read("test_count", cfg.test_count);
    r.finish();
  }
  {
    detail::SectionReader r(section_or_empty(root, "compare"), "compare");
    r.read("translations", cfg.compare_translations);
    r.read("start", cfg.compare_start);
    r.finish();
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
  auto cfg = parse_config(in);
  if (auto* src = std::get_if<FileSource>(&cfg.source); src && src->file.is_relative())
    src->file = path.parent_path() / src->file;
  return cfg;
}

}  // namespace gearwave
