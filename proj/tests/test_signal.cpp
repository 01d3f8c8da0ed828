#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gearwave/signal.hpp"

using namespace gearwave;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("gearwave_test_" + name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

// Magnitude of the DFT of x at frequency f (Hz), direct sum.
double dft_magnitude(std::span<const double> x, double f, double fs_hz) {
  std::complex<double> acc;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(i) / fs_hz);
  return std::abs(acc) / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("load_signal parses one value per line", "[signal]") {
  const auto s = load_signal(write_temp("ok.txt", "0.0\n1.0\n-1.0\n"), 10000.0);
  CHECK(s.size() == 3);
  CHECK(std::vector<double>(s.samples().begin(), s.samples().end()) == std::vector<double>{0, 1, -1});
  CHECK(s.sample_rate_hz() == 10000.0);
}

TEST_CASE("load_signal rejects empty and malformed files", "[signal]") {
  CHECK_THROWS_WITH(load_signal(write_temp("empty.txt", ""), 10000.0),
                    Catch::Matchers::ContainsSubstring("empty signal"));
  try {
    load_signal(write_temp("bad.txt", "1.0\nabc\n3\n"), 10000.0);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("line 2"));
  }
  CHECK_THROWS_AS(load_signal(write_temp("nan.txt", "1\nnan\n"), 10000.0), ParseError);
  CHECK_THROWS_WITH(load_signal("/nonexistent/gearwave.txt", 10000.0),
                    Catch::Matchers::ContainsSubstring("/nonexistent/gearwave.txt"));
}

TEST_CASE("Signal enforces its invariants", "[signal]") {
  CHECK_THROWS(Signal({}, 1.0));
  CHECK_THROWS(Signal({1.0}, 0.0));
  CHECK_THROWS(Signal({1.0, std::numeric_limits<double>::infinity()}, 1.0));
}

TEST_CASE("write_signal round-trips exactly", "[signal]") {
  SynthConfig cfg;
  cfg.impulse_amplitude = 2.0;
  cfg.rng_seed = 3;
  const auto s = synthesize_gearbox(cfg);
  const auto path = fs::temp_directory_path() / "gearwave_test_roundtrip.txt";
  save_signal(path, s);
  CHECK(load_signal(path, cfg.sample_rate_hz) == s);
}

TEST_CASE("frame_signal splits into disjoint prefix frames", "[signal]") {
  const Signal s(std::vector<double>(10000, 0.5), 10000.0);
  const auto frames = frame_signal(s, 1250);
  REQUIRE(frames.size() == 8);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    CHECK(frames[k].start_index == k * 1250);
    CHECK(frames[k].length() == 1250);
    CHECK(frames[k].samples.data() == s.samples().data() + k * 1250);
  }
  CHECK(frame_signal(Signal(std::vector<double>(1250, 1.0), 1.0), 1250).size() == 1);
  CHECK_THROWS(frame_signal(Signal(std::vector<double>(1249, 1.0), 1.0), 1250));
  CHECK_THROWS(frame_signal(s, 0));
}

TEST_CASE("frames concatenate to the covered prefix", "[signal][property]") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = 1 + rng.below(500);
    const std::size_t frame = 1 + rng.below(len);
    std::vector<double> x(len);
    for (auto& v : x) v = rng.normal();
    const Signal s(x, 100.0);
    std::vector<double> joined;
    for (const auto& f : frame_signal(s, frame)) joined.insert(joined.end(), f.samples.begin(), f.samples.end());
    CHECK(joined == std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(len / frame * frame)));
  }
}

TEST_CASE("default synthetic record matches the frame length", "[signal][synth]") {
  SynthConfig cfg;  // 0.125 s at 10 kHz
  const auto s = synthesize_gearbox(cfg);
  CHECK(s.size() == 1250);
  CHECK(cfg.mesh_frequency_hz() == Catch::Approx(355.0));
  CHECK(cfg.duration_s / cfg.revolution_period_s() == Catch::Approx(2.958).epsilon(1e-3));
}

TEST_CASE("synthesis without excitation is silent", "[signal][synth]") {
  SynthConfig cfg;
  cfg.mesh_amplitude = 0.0;
  cfg.impulse_amplitude = 0.0;
  cfg.noise_std = 0.0;
  for (double v : synthesize_gearbox(cfg).samples()) CHECK(v == 0.0);
}

TEST_CASE("synthesis is a pure function of its configuration", "[signal][synth]") {
  SynthConfig cfg;
  cfg.impulse_amplitude = 2.5;
  cfg.rng_seed = 42;
  CHECK(synthesize_gearbox(cfg) == synthesize_gearbox(cfg));
  auto other = cfg;
  other.rng_seed = 43;
  CHECK_FALSE(synthesize_gearbox(cfg) == synthesize_gearbox(other));
}

TEST_CASE("synthesis validates its configuration", "[signal][synth]") {
  SynthConfig cfg;
  cfg.shaft_speed_rpm = 30000.0;  // 7500 Hz mesh > 5 kHz Nyquist
  CHECK_THROWS_WITH(synthesize_gearbox(cfg), Catch::Matchers::ContainsSubstring("Nyquist"));
  cfg = {};
  cfg.duration_s = 0.0;
  CHECK_THROWS_AS(synthesize_gearbox(cfg), ConfigError);
  cfg = {};
  cfg.noise_std = -1.0;
  CHECK_THROWS_AS(synthesize_gearbox(cfg), ConfigError);
}

TEST_CASE("one impact per driver revolution", "[signal][synth]") {
  SynthConfig cfg;
  cfg.impulse_amplitude = 1.0;
  for (double duration : {0.125, 0.1, 0.5, 1.0, 2.37}) {
    cfg.duration_s = duration;
    const auto times = burst_times_s(cfg);
    CHECK(times.size() ==
          static_cast<std::size_t>(std::llround(duration * cfg.shaft_speed_rpm / 60.0)));
    for (std::size_t k = 1; k < times.size(); ++k)
      CHECK(times[k] - times[k - 1] == Catch::Approx(cfg.revolution_period_s()));
  }
  cfg.impulse_amplitude = 0.0;
  CHECK(burst_times_s(cfg).empty());
}

TEST_CASE("impacts are located at the reported times", "[signal][synth]") {
  SynthConfig cfg;
  cfg.mesh_amplitude = 0.0;
  cfg.noise_std = 0.0;
  cfg.impulse_amplitude = 3.0;
  cfg.duration_s = 0.5;
  const auto s = synthesize_gearbox(cfg);
  for (double t : burst_times_s(cfg)) {
    const auto centre = static_cast<std::size_t>(std::llround(t * cfg.sample_rate_hz));
    // nearest sample is at most half a sample off centre: 3 cos(5 * 0.5 / 4) * 0.99 ~ 2.41
    CHECK(std::abs(s.samples()[centre]) > 2.4);
  }
  // quiet just before each onset's rise
  const auto first = static_cast<std::size_t>(burst_times_s(cfg).front() * cfg.sample_rate_hz);
  CHECK(std::abs(s.samples()[first - 30]) < 1e-12);
}

TEST_CASE("healthy record has no line at the impact repetition rate", "[signal][synth]") {
  SynthConfig cfg;
  cfg.duration_s = 1.0;
  cfg.rng_seed = 5;
  const double rate = cfg.shaft_speed_rpm / 60.0;

  // Energy envelope x^2 with its mean removed; a repeating impact shows up as
  // a spectral line at the repetition rate.
  auto envelope = [](const Signal& s) {
    std::vector<double> e(s.samples().begin(), s.samples().end());
    double mean = 0;
    for (auto& v : e) mean += (v *= v) / static_cast<double>(e.size());
    for (auto& v : e) v -= mean;
    return e;
  };
  const auto healthy = envelope(synthesize_gearbox(cfg));

  // floor: RMS magnitude over off-rate probe frequencies between 3 and 20 Hz
  double floor = 0;
  for (int k = 0; k < 20; ++k) {
    const double m = dft_magnitude(healthy, 3.1 + 0.85 * k, cfg.sample_rate_hz);
    floor += m * m / 20.0;
  }
  floor = std::sqrt(floor);
  CHECK(dft_magnitude(healthy, rate, cfg.sample_rate_hz) < 4.0 * floor);

  cfg.impulse_amplitude = 2.5;
  const auto chipped = envelope(synthesize_gearbox(cfg));
  CHECK(dft_magnitude(chipped, rate, cfg.sample_rate_hz) > 20.0 * floor);
}
