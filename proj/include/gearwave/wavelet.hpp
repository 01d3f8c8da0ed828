#pragma once

// Real Morlet daughter wavelets on a sample-indexed time axis, the discrete
// CWT coefficient, and the cosine shape-similarity index used to pick the
// best-matching scale at a translation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gearwave/error.hpp"

namespace gearwave {

/// Centre frequency of the real Morlet, rad per unit time.
inline constexpr double kMorletOmega = 5.0;

/// Daughter support is truncated to |t - b| <= kSupportHalfWidth * a.
inline constexpr double kSupportHalfWidth = 4.0;

inline double morlet(double t) noexcept {
  return std::exp(-0.5 * t * t) * std::cos(kMorletOmega * t);
}

/// a^{-1/2} morlet((i - b) / a) sampled at integer i, clipped to [0, n).
struct DaughterWavelet {
  double scale = 1.0;
  double translation = 0.0;
  std::size_t support_start = 0;
  std::vector<double> values;

  /// One past the last sample index covered.
  std::size_t support_end() const noexcept { return support_start + values.size(); }
};

namespace detail {

struct Support {
  std::size_t begin;
  std::size_t end;  // exclusive
};

inline void check_scale_translation(double scale, double translation, std::size_t n) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error("wavelet scale must be positive, got " + std::to_string(scale));
  if (!(translation >= 0.0) || !(translation < static_cast<double>(n)))
    throw Error("translation " + std::to_string(translation) + " outside [0, " +
                std::to_string(n) + ")");
}

inline Support clipped_support(double scale, double translation, std::size_t n) {
  const double reach = kSupportHalfWidth * scale;
  const double lo = std::max(0.0, std::ceil(translation - reach));
  const double hi = std::min(static_cast<double>(n) - 1.0, std::floor(translation + reach));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi) + 1};
}

}  // namespace detail

inline DaughterWavelet daughter_wavelet(double scale, double translation, std::size_t signal_length) {
  detail::check_scale_translation(scale, translation, signal_length);
  const auto support = detail::clipped_support(scale, translation, signal_length);
  DaughterWavelet w{scale, translation, support.begin, {}};
  w.values.reserve(support.end - support.begin);
  const double norm = 1.0 / std::sqrt(scale);
  for (std::size_t i = support.begin; i < support.end; ++i)
    w.values.push_back(norm * morlet((static_cast<double>(i) - translation) / scale));
  return w;
}

/// Discrete form of W(a, b): the signal dotted with the daughter over its support.
inline double cwt_coefficient(std::span<const double> signal, double scale, double translation) {
  const auto w = daughter_wavelet(scale, translation, signal.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k) sum += signal[w.support_start + k] * w.values[k];
  return sum;
}

/// Cosine between daughter and signal window. `degenerate` marks an
/// all-zero window, for which the fitness is defined as 0.
struct ShapeMatch {
  double fitness = 0.0;
  bool degenerate = false;
};

namespace detail {

inline ShapeMatch cosine(double dot, double ww, double xx) noexcept {
  if (xx == 0.0 || ww == 0.0) return {0.0, true};
  return {std::clamp(dot / std::sqrt(ww * xx), -1.0, 1.0), false};
}

}  // namespace detail

inline ShapeMatch shape_match(std::span<const double> signal, double scale, double translation) {
  const auto w = daughter_wavelet(scale, translation, signal.size());
  double dot = 0.0, ww = 0.0, xx = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    const double x = signal[w.support_start + k];
    dot += w.values[k] * x;
    ww += w.values[k] * w.values[k];
    xx += x * x;
  }
  return detail::cosine(dot, ww, xx);
}

inline double shape_fitness(std::span<const double> signal, double scale, double translation) {
  return shape_match(signal, scale, translation).fitness;
}

/// Scale -> shape fitness at one integer translation.
///
/// Evaluates the same quantity as shape_match() but walks the support outward
/// from the centre, generating the Gaussian envelope and the carrier by
/// recurrence, so a call costs two exp() and one cos() instead of one of each
/// per sample. The a^{-1/2} factor cancels in the cosine and is dropped.
class ScaleObjective {
 public:
  ScaleObjective(std::span<const double> signal, std::size_t translation)
      : signal_(signal), translation_(translation) {
    detail::check_scale_translation(1.0, static_cast<double>(translation), signal.size());
  }

  std::size_t translation() const noexcept { return translation_; }

  ShapeMatch match(double scale) const {
    detail::check_scale_translation(scale, static_cast<double>(translation_), signal_.size());
    const double* x = signal_.data();
    const std::size_t b = translation_;
    const auto reach = static_cast<std::size_t>(std::floor(kSupportHalfWidth * scale));
    const std::size_t left = std::min(reach, b);
    const std::size_t right = std::min(reach, signal_.size() - 1 - b);
    const std::size_t far = std::max(left, right);

    // envelope g_k = exp(-k^2 / 2a^2), g_{k+1} = g_k * r_k, r_{k+1} = r_k * q
    const double inv_a2 = 1.0 / (scale * scale);
    const double q = std::exp(-inv_a2);
    double r = std::exp(-0.5 * inv_a2);
    double g = 1.0;
    // carrier c_k = cos(k theta), c_{k+1} = 2 cos(theta) c_k - c_{k-1}
    const double two_cos = 2.0 * std::cos(kMorletOmega / scale);
    double c_prev = two_cos * 0.5;  // c_{-1} = cos(theta)
    double c = 1.0;

    double dot = x[b], ww = 1.0, xx = x[b] * x[b];
    for (std::size_t k = 1; k <= far; ++k) {
      g *= r;
      r *= q;
      const double c_next = two_cos * c - c_prev;
      c_prev = c;
      c = c_next;
      const double w = g * c;
      if (k <= left) {
        const double v = x[b - k];
        dot += w * v;
        ww += w * w;
        xx += v * v;
      }
      if (k <= right) {
        const double v = x[b + k];
        dot += w * v;
        ww += w * w;
        xx += v * v;
      }
    }
    return detail::cosine(dot, ww, xx);
  }

  double operator()(double scale) const { return match(scale).fitness; }

 private:
  std::span<const double> signal_;
  std::size_t translation_;
};

}  // namespace gearwave
