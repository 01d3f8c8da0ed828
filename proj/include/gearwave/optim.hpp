#pragma once

// Bounded one-dimensional maximizers: particle swarm and a Gray-coded genetic
// algorithm. Both are single-threaded and fully determined by their seed,
// apart from the wall-clock limits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gearwave/error.hpp"
#include "gearwave/random.hpp"

namespace gearwave {

enum class Termination { max_generations, stall_time, time_limit, fitness_tolerance };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::max_generations: return "max_generations";
    case Termination::stall_time: return "stall_time";
    case Termination::time_limit: return "time_limit";
    case Termination::fitness_tolerance: return "fitness_tolerance";
  }
  return "unknown";
}

/// Global best after each generation; generation 0 is the initial population.
struct TraceRow {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  std::size_t evaluations = 0;
  double elapsed_s = 0.0;
};

struct OptimResult {
  double best_position = 0.0;
  double best_fitness = 0.0;
  std::size_t generations_run = 0;
  std::size_t fitness_evaluations = 0;
  double wall_time_s = 0.0;
  Termination termination = Termination::max_generations;
  std::vector<TraceRow> trace;
};

/// Everything in an OptimResult except timings.
inline bool same_outcome(const OptimResult& a, const OptimResult& b) {
  if (a.best_position != b.best_position || a.best_fitness != b.best_fitness ||
      a.generations_run != b.generations_run || a.fitness_evaluations != b.fitness_evaluations ||
      a.termination != b.termination || a.trace.size() != b.trace.size())
    return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (a.trace[i].best_fitness != b.trace[i].best_fitness ||
        a.trace[i].evaluations != b.trace[i].evaluations)
      return false;
  }
  return true;
}

inline void write_trace_csv_header(std::ostream& out) {
  out << "generation,gb_fitness,evaluations,elapsed_s\n";
}

inline void write_trace_csv(std::ostream& out, const OptimResult& result, bool header = true) {
  if (header) write_trace_csv_header(out);
  for (const auto& row : result.trace) {
    out << row.generation << ',' << row.best_fitness << ',' << row.evaluations << ','
        << row.elapsed_s << '\n';
  }
}

struct SwarmConfig {
  double c1 = 2.0;
  double c2 = 2.0;
  double v_max = std::numeric_limits<double>::infinity();
  // Inertia falls linearly from start to end over the run; 1 and 1 give the
  // plain update v <- v + c1 r1 (pb - p) + c2 r2 (gb - p).
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double lower_bound = 1.0;
  double upper_bound = 32.0;
  std::size_t population = 20;
  std::size_t max_generations = 50;
  double stall_time_limit_s = 20.0;
  double time_limit_s = 30.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw ConfigError("c1 and c2 must be non-negative");
    if (!(v_max > 0.0)) throw ConfigError("v_max must be positive");
    if (!std::isfinite(lower_bound) || !std::isfinite(upper_bound) || !(lower_bound < upper_bound))
      throw ConfigError("search bounds must be finite with lower < upper");
    if (population < 2) throw ConfigError("swarm population must be at least 2");
    if (max_generations < 1) throw ConfigError("max_generations must be at least 1");
    if (!(stall_time_limit_s > 0.0) || !(time_limit_s > 0.0))
      throw ConfigError("time limits must be positive");
    if (!std::isfinite(inertia_start) || !std::isfinite(inertia_end))
      throw ConfigError("inertia weights must be finite");
  }

  double inertia(std::size_t generation) const noexcept {
    if (max_generations <= 1) return inertia_start;
    const double frac =
        static_cast<double>(generation - 1) / static_cast<double>(max_generations - 1);
    return inertia_start + (inertia_end - inertia_start) * frac;
  }
};

struct Particle {
  double position = 0.0;
  double velocity = 0.0;
  double personal_best_position = 0.0;
  double personal_best_fitness = -std::numeric_limits<double>::infinity();
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <class F>
double evaluate_checked(F& fitness, double x) {
  const double f = fitness(x);
  if (!std::isfinite(f))
    throw OptimError("objective returned a non-finite value at " + std::to_string(x), x);
  return f;
}

}  // namespace detail

/// Particle swarm maximization of `fitness` over [lower_bound, upper_bound].
///
/// Particles start uniformly in the bounds at rest. Each generation every
/// particle draws fresh r1, r2 ~ U(0, 1) and moves by
///   v <- w v + c1 r1 (pb - p) + c2 r2 (gb - p),  p <- p + v,
/// with |v| capped at v_max and p clamped to the bounds (velocity zeroed on
/// contact). The global best is refreshed once per generation. The run stops
/// at max_generations, when no improvement has been seen for
/// stall_time_limit_s, or after time_limit_s, whichever comes first.
template <class F>
OptimResult pso_maximize(F&& fitness, const SwarmConfig& config) {
  config.validate();
  detail::Stopwatch clock;
  Rng rng(config.rng_seed);
  const double lo = config.lower_bound, hi = config.upper_bound;

  std::vector<Particle> swarm(config.population);
  OptimResult result;
  for (auto& p : swarm) {
    p.position = rng.uniform(lo, hi);
    p.personal_best_position = p.position;
    p.personal_best_fitness = detail::evaluate_checked(fitness, p.position);
  }
  result.fitness_evaluations = swarm.size();

  auto best = std::max_element(swarm.begin(), swarm.end(), [](const Particle& a, const Particle& b) {
    return a.personal_best_fitness < b.personal_best_fitness;
  });
  double gb = best->personal_best_position;
  double gb_fitness = best->personal_best_fitness;
  double last_improvement_s = clock.seconds();
  result.trace.push_back({0, gb_fitness, result.fitness_evaluations, last_improvement_s});

  for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
    const double w = config.inertia(gen);
    for (auto& p : swarm) {
      const double r1 = rng.uniform();
      const double r2 = rng.uniform();
      p.velocity = w * p.velocity + config.c1 * r1 * (p.personal_best_position - p.position) +
                   config.c2 * r2 * (gb - p.position);
      p.velocity = std::clamp(p.velocity, -config.v_max, config.v_max);
      p.position += p.velocity;
      if (p.position < lo || p.position > hi) {
        p.position = std::clamp(p.position, lo, hi);
        p.velocity = 0.0;
      }
      const double f = detail::evaluate_checked(fitness, p.position);
      if (f > p.personal_best_fitness) {
        p.personal_best_fitness = f;
        p.personal_best_position = p.position;
      }
    }
    result.fitness_evaluations += swarm.size();
    result.generations_run = gen;

    const double now = clock.seconds();
    for (const auto& p : swarm) {
      if (p.personal_best_fitness > gb_fitness) {
        gb_fitness = p.personal_best_fitness;
        gb = p.personal_best_position;
        last_improvement_s = now;
      }
    }
    result.trace.push_back({gen, gb_fitness, result.fitness_evaluations, now});

    if (now >= config.time_limit_s) {
      result.termination = Termination::time_limit;
      break;
    }
    if (now - last_improvement_s >= config.stall_time_limit_s) {
      result.termination = Termination::stall_time;
      break;
    }
  }

  result.best_position = gb;
  result.best_fitness = gb_fitness;
  result.wall_time_s = clock.seconds();
  return result;
}

struct GaConfig {
  std::size_t population = 20;
  std::size_t elite_count = 4;
  double mutation_probability = 0.01;
  double crossover_fraction = 0.8;
  std::size_t max_generations = 50;
  double fitness_tolerance = 1e-9;
  // Window over which best-fitness improvement is compared to the tolerance.
  std::size_t stall_generations = 50;
  double lower_bound = 1.0;
  double upper_bound = 32.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (population < 2) throw ConfigError("GA population must be at least 2");
    if (elite_count >= population) throw ConfigError("elite_count must be below population");
    if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
      throw ConfigError("mutation_probability must lie in [0, 1]");
    if (!(crossover_fraction >= 0.0 && crossover_fraction <= 1.0))
      throw ConfigError("crossover_fraction must lie in [0, 1]");
    if (max_generations < 1) throw ConfigError("max_generations must be at least 1");
    if (!(fitness_tolerance > 0.0)) throw ConfigError("fitness_tolerance must be positive");
    if (stall_generations < 1) throw ConfigError("stall_generations must be at least 1");
    if (!std::isfinite(lower_bound) || !std::isfinite(upper_bound) || !(lower_bound < upper_bound))
      throw ConfigError("search bounds must be finite with lower < upper");
  }
};

/// Fixed-point Gray-coded chromosome over [lower, upper].
class GrayCode {
 public:
  static constexpr unsigned kBits = 24;
  static constexpr std::uint32_t kMask = (1u << kBits) - 1;

  GrayCode(double lower, double upper) : lower_(lower), upper_(upper) {}

  double decode(std::uint32_t gray) const noexcept {
    std::uint32_t v = gray & kMask;
    for (std::uint32_t shift = v >> 1; shift != 0; shift >>= 1) v ^= shift;
    return lower_ + (upper_ - lower_) * static_cast<double>(v) / static_cast<double>(kMask);
  }

  static std::uint32_t encode_index(std::uint32_t index) noexcept {
    return (index ^ (index >> 1)) & kMask;
  }

 private:
  double lower_, upper_;
};

/// Genetic-algorithm maximization of `fitness` over [lower_bound, upper_bound].
///
/// Each generation keeps the elite_count best individuals, then fills the rest
/// of the population with children: a crossover_fraction share by scattered
/// (uniform bit-mask) crossover of two tournament winners, the remainder as
/// tournament-winner copies. Every child then has each bit flipped with
/// probability mutation_probability. Elite fitness values are reused, not
/// recomputed. The run stops after max_generations, or once the best fitness
/// has improved by less than fitness_tolerance over stall_generations.
template <class F>
OptimResult ga_maximize(F&& fitness, const GaConfig& config) {
  config.validate();
  detail::Stopwatch clock;
  Rng rng(config.rng_seed);
  const GrayCode code(config.lower_bound, config.upper_bound);
  const std::size_t n = config.population;

  struct Individual {
    std::uint32_t genes;
    double fitness;
  };
  std::vector<Individual> pop(n);
  for (auto& ind : pop) {
    ind.genes = static_cast<std::uint32_t>(rng.bits()) & GrayCode::kMask;
    ind.fitness = detail::evaluate_checked(fitness, code.decode(ind.genes));
  }

  OptimResult result;
  result.fitness_evaluations = n;

  auto by_fitness = [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; };
  std::stable_sort(pop.begin(), pop.end(), by_fitness);
  std::vector<double> best_history{pop.front().fitness};
  result.trace.push_back({0, pop.front().fitness, n, clock.seconds()});

  auto tournament = [&]() -> const Individual& {
    const auto& a = pop[rng.below(n)];
    const auto& b = pop[rng.below(n)];
    return a.fitness >= b.fitness ? a : b;
  };
  auto mutate = [&](std::uint32_t genes) {
    for (unsigned bit = 0; bit < GrayCode::kBits; ++bit) {
      if (rng.uniform() < config.mutation_probability) genes ^= 1u << bit;
    }
    return genes;
  };

  const std::size_t n_children = n - config.elite_count;
  const auto n_crossover = static_cast<std::size_t>(
      std::llround(config.crossover_fraction * static_cast<double>(n_children)));

  std::vector<Individual> next;
  next.reserve(n);
  for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
    next.assign(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(config.elite_count));
    for (std::size_t c = 0; c < n_children; ++c) {
      std::uint32_t genes;
      if (c < n_crossover) {
        const std::uint32_t mother = tournament().genes;
        const std::uint32_t father = tournament().genes;
        const auto mask = static_cast<std::uint32_t>(rng.bits()) & GrayCode::kMask;
        genes = (mother & mask) | (father & ~mask & GrayCode::kMask);
      } else {
        genes = tournament().genes;
      }
      genes = mutate(genes);
      next.push_back({genes, detail::evaluate_checked(fitness, code.decode(genes))});
    }
    result.fitness_evaluations += n_children;
    pop.swap(next);
    std::stable_sort(pop.begin(), pop.end(), by_fitness);
    result.generations_run = gen;
    best_history.push_back(pop.front().fitness);
    result.trace.push_back({gen, pop.front().fitness, result.fitness_evaluations, clock.seconds()});

    if (gen >= config.stall_generations &&
        best_history[gen] - best_history[gen - config.stall_generations] <
            config.fitness_tolerance) {
      result.termination = gen == config.max_generations ? Termination::max_generations
                                                         : Termination::fitness_tolerance;
      break;
    }
  }

  result.best_position = code.decode(pop.front().genes);
  result.best_fitness = pop.front().fitness;
  result.wall_time_s = clock.seconds();
  return result;
}

}  // namespace gearwave
