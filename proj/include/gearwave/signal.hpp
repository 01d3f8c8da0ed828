#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gearwave/error.hpp"
#include "gearwave/random.hpp"
#include "gearwave/wavelet.hpp"

namespace gearwave {

/// Uniformly sampled acceleration record.
class Signal {
 public:
  Signal(std::vector<double> samples, double sample_rate_hz)
      : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
    if (samples_.empty()) throw Error("empty signal");
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
      throw Error("sample rate must be positive and finite");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i]))
        throw Error("non-finite sample at index " + std::to_string(i));
    }
  }

  std::span<const double> samples() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept { return static_cast<double>(size()) / sample_rate_hz_; }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
};

/// Contiguous window of a Signal. Borrows the parent's storage.
struct Frame {
  std::size_t start_index = 0;
  std::span<const double> samples;

  std::size_t length() const noexcept { return samples.size(); }
};

/// Split into floor(len / frame_length) non-overlapping frames; the tail is dropped.
inline std::vector<Frame> frame_signal(const Signal& signal, std::size_t frame_length) {
  if (frame_length == 0) throw Error("frame length must be positive");
  if (frame_length > signal.size()) {
    throw Error("frame length " + std::to_string(frame_length) + " exceeds signal length " +
                std::to_string(signal.size()));
  }
  const auto all = signal.samples();
  std::vector<Frame> frames;
  frames.reserve(all.size() / frame_length);
  for (std::size_t start = 0; start + frame_length <= all.size(); start += frame_length)
    frames.push_back({start, all.subspan(start, frame_length)});
  return frames;
}

/// Reads one decimal value per line. Blank lines are rejected like any other
/// malformed line; a single trailing newline is fine.
inline Signal load_signal(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open signal file '" + path.string() + "'");

  std::vector<double> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view text(line);
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);

    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size() ||
        !std::isfinite(value)) {
      throw ParseError("'" + path.string() + "': cannot parse sample '" + line + "'", line_no);
    }
    samples.push_back(value);
  }
  if (samples.empty()) throw Error("empty signal in '" + path.string() + "'");
  return Signal(std::move(samples), sample_rate_hz);
}

/// Shortest round-trip decimal form, one value per line.
inline void write_signal(std::ostream& out, const Signal& signal) {
  char buf[32];
  for (double x : signal.samples()) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, end - buf);
    out.put('\n');
  }
}

inline void save_signal(const std::filesystem::path& path, const Signal& signal) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write signal file '" + path.string() + "'");
  write_signal(out, signal);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

/// Synthetic single-stage gearbox: mesh tone, one chipped-tooth impact per
/// driver revolution, white Gaussian noise.
struct SynthConfig {
  double shaft_speed_rpm = 1420.0;
  int driver_teeth = 15;
  int driven_teeth = 110;
  double sample_rate_hz = 10000.0;
  double duration_s = 0.125;
  double mesh_amplitude = 1.0;
  double impulse_amplitude = 0.0;  // 0 models a healthy gear
  double impulse_decay_rate = 150.0;
  double impulse_scale = 4.0;  // Morlet scale of the impact, in samples
  double noise_std = 0.25;
  std::uint64_t rng_seed = 0;

  double mesh_frequency_hz() const noexcept { return shaft_speed_rpm / 60.0 * driver_teeth; }
  double revolution_period_s() const noexcept { return 60.0 / shaft_speed_rpm; }
  bool healthy() const noexcept { return impulse_amplitude == 0.0; }

  std::size_t sample_count() const {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  }

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    auto non_negative = [](double v) { return v >= 0.0 && std::isfinite(v); };
    if (!positive(shaft_speed_rpm)) throw ConfigError("shaft_speed_rpm must be positive");
    if (driver_teeth <= 0 || driven_teeth <= 0) throw ConfigError("tooth counts must be positive");
    if (!positive(sample_rate_hz)) throw ConfigError("sample_rate_hz must be positive");
    if (!positive(duration_s)) throw ConfigError("duration_s must be positive");
    if (!non_negative(mesh_amplitude) || !non_negative(impulse_amplitude) ||
        !non_negative(noise_std))
      throw ConfigError("amplitudes and noise_std must be non-negative");
    if (!positive(impulse_decay_rate)) throw ConfigError("impulse_decay_rate must be positive");
    if (!positive(impulse_scale)) throw ConfigError("impulse_scale must be positive");
    if (mesh_frequency_hz() >= sample_rate_hz / 2.0) {
      throw ConfigError("mesh frequency " + std::to_string(mesh_frequency_hz()) +
                        " Hz is at or above the Nyquist limit " +
                        std::to_string(sample_rate_hz / 2.0) + " Hz");
    }
    if (sample_count() == 0) throw ConfigError("duration_s yields zero samples");
  }
};

/// Burst centers in seconds: (k + 1/2) revolution periods, k = 0, 1, ...
/// while inside the record, so a record of D seconds holds round(D / T) bursts.
inline std::vector<double> burst_times_s(const SynthConfig& config) {
  std::vector<double> times;
  if (config.healthy()) return times;
  const double period = config.revolution_period_s();
  const double duration = static_cast<double>(config.sample_count()) / config.sample_rate_hz;
  for (std::size_t k = 0;; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * period;
    if (t >= duration) break;
    times.push_back(t);
  }
  return times;
}

/// Unit-amplitude impact waveform at `tau` samples from the burst centre.
inline double impact_shape(double tau, const SynthConfig& config) {
  const double u = tau / config.impulse_scale;
  const double envelope = tau < 0.0 ? std::exp(-0.5 * u * u)
                                    : std::exp(-config.impulse_decay_rate * tau / config.sample_rate_hz);
  return envelope * std::cos(kMorletOmega * u);
}

inline Signal synthesize_gearbox(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.sample_count();
  const double fs = config.sample_rate_hz;
  std::vector<double> x(n, 0.0);

  if (config.mesh_amplitude > 0.0) {
    const double omega = 2.0 * std::numbers::pi * config.mesh_frequency_hz() / fs;
    for (std::size_t i = 0; i < n; ++i)
      x[i] = config.mesh_amplitude * std::sin(omega * static_cast<double>(i));
  }

  // Impact: Morlet onset (Gaussian rise) ringing down exponentially after the
  // centre; the ring is cut where the envelope drops below 1e-3.
  const double rise = kSupportHalfWidth * config.impulse_scale;
  const double ring = std::log(1e3) * fs / config.impulse_decay_rate;
  for (double t : burst_times_s(config)) {
    const double center = t * fs;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(center - rise));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(center + ring));
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
         i <= hi && i < static_cast<std::ptrdiff_t>(n); ++i) {
      x[static_cast<std::size_t>(i)] += config.impulse_amplitude * impact_shape(static_cast<double>(i) - center, config);
    }
  }

  if (config.noise_std > 0.0) {
    Rng rng(config.rng_seed);
    for (double& v : x) v += config.noise_std * rng.normal();
  }
  return Signal(std::move(x), fs);
}

}  // namespace gearwave
