#pragma once

// Exact wavelet analysis: at every translation, search the Morlet scale whose
// daughter best matches the local signal shape.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <variant>
#include <vector>

#include "gearwave/optim.hpp"
#include "gearwave/random.hpp"
#include "gearwave/wavelet.hpp"

namespace gearwave {

using OptimizerConfig = std::variant<SwarmConfig, GaConfig>;

inline std::uint64_t seed_of(const OptimizerConfig& config) {
  return std::visit([](const auto& c) { return c.rng_seed; }, config);
}

inline OptimizerConfig with_seed(OptimizerConfig config, std::uint64_t seed) {
  std::visit([seed](auto& c) { c.rng_seed = seed; }, config);
  return config;
}

inline double lower_bound_of(const OptimizerConfig& config) {
  return std::visit([](const auto& c) { return c.lower_bound; }, config);
}

inline double upper_bound_of(const OptimizerConfig& config) {
  return std::visit([](const auto& c) { return c.upper_bound; }, config);
}

template <class F>
OptimResult maximize(F&& fitness, const OptimizerConfig& config) {
  if (const auto* swarm = std::get_if<SwarmConfig>(&config)) return pso_maximize(fitness, *swarm);
  return ga_maximize(fitness, std::get<GaConfig>(config));
}

struct ScaleEstimate {
  std::size_t translation = 0;
  double scale = 0.0;
  double fitness = 0.0;
  bool degenerate = false;  // the window at the chosen scale is all zero

  friend bool operator==(const ScaleEstimate&, const ScaleEstimate&) = default;
};

/// Runs the configured optimizer (with the config's own seed) on
/// a -> shape fitness at `translation`.
inline ScaleEstimate best_scale_at(std::span<const double> signal, std::size_t translation,
                                   const OptimizerConfig& config, OptimResult* diagnostics = nullptr) {
  const ScaleObjective objective(signal, translation);
  OptimResult result = maximize(objective, config);
  const auto at_best = objective.match(result.best_position);
  ScaleEstimate estimate{translation, result.best_position, result.best_fitness, at_best.degenerate};
  if (diagnostics) *diagnostics = std::move(result);
  return estimate;
}

/// Seed used for the search at `translation` under base seed `base`.
inline std::uint64_t translation_seed(std::uint64_t base, std::size_t translation) {
  return derive_seed(base, translation);
}

/// One best-scale estimate per sample of `frame`, ordered by translation.
/// Translations are independent searches seeded from (base seed, translation),
/// so the output is identical for any `threads` value.
inline std::vector<ScaleEstimate> scan_frame(std::span<const double> frame,
                                             const OptimizerConfig& config, unsigned threads = 1) {
  if (frame.empty()) throw Error("cannot scan an empty frame");
  std::visit([](const auto& c) { c.validate(); }, config);
  const std::uint64_t base = seed_of(config);
  std::vector<ScaleEstimate> out(frame.size());

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < frame.size(); b += stride)
      out[b] = best_scale_at(frame, b, with_seed(config, translation_seed(base, b)));
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(frame.size())));
  if (threads == 1) {
    work(0, 1);
    return out;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace gearwave
