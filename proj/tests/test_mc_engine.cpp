#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "ifspec/block_stream.hpp"
#include "ifspec/mc_engine.hpp"

using namespace ifspec;
using namespace ifspec::mc;

TEST_CASE("Welch estimate of white noise is flat at sigma^2 dt") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 2.0);
  RVector x(1 << 18);
  for (auto& v : x) v = g(rng);
  const double dt = 1e-3;
  WelchConfig cfg;
  cfg.segment_len = 1024;
  const auto p = welch_psd(x, dt, cfg);
  const double mean = std::accumulate(p.values.begin(), p.values.end(), 0.0) / static_cast<double>(p.size());
  CHECK(mean == doctest::Approx(4.0 * dt).epsilon(0.02));
  CHECK(p.freqs.front() == doctest::Approx(-0.5 / dt));
}

TEST_CASE("Welch keeps the power of a tone") {
  const std::size_t n = 1 << 16;
  const double dt = 1.0, f0 = 64.0 / 1024.0;
  RVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 3.0 * std::cos(2 * kPi * f0 * static_cast<double>(i)) + 0.5;
  WelchConfig cfg;
  cfg.segment_len = 1024;
  const auto p = welch_psd(x, dt, cfg);
  const double power = std::accumulate(p.values.begin(), p.values.end(), 0.0) * p.df();
  CHECK(power == doctest::Approx(4.5).epsilon(1e-6));
  REQUIRE(p.lines.size() == 1);
  CHECK(p.lines[0].weight == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Welch settings are validated") {
  WelchConfig cfg;
  cfg.segment_len = 1000;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.segment_len = 1024;
  cfg.overlap = 1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.overlap = 0.5;
  CHECK_THROWS_AS(welch_psd(RVector(2048, 0.0), 1.0, cfg), ConfigError);  // fewer than 8 segments
}

TEST_CASE("constant-envelope QPSK with rectangular pulses has no continuous energy spectrum") {
  const auto src = shaping::make_source({4, shaping::ShapingMethod::Iid, 0.0, 1}, 1 << 14, 3);
  pulse::PulseSpec s;
  s.shape = pulse::PulseShape::Rect;
  const auto w = synthesize(src.stream, src.constellation, s, std::nullopt, 3);
  WelchConfig cfg;
  cfg.segment_len = 1024;
  const auto p = energy_psd(w, cfg);
  const double mean_power = 1.0 / s.symbol_period;
  double peak = 0.0;
  for (double v : p.values) peak = std::max(peak, std::abs(v));
  CHECK(peak < 1e-20 * mean_power * mean_power * s.symbol_period);
}

TEST_CASE("waveform synthesis is deterministic and power-normalized") {
  const auto src = shaping::make_source({64, shaping::ShapingMethod::Ess, 4.8, 18}, 18 * 512, 8);
  pulse::PulseSpec s;
  s.span_symbols = pulse::min_span_symbols(s.shape, s.rolloff);
  pulse::FiberDispersion fiber;
  fiber.length = 160e3;
  const auto a = synthesize(src.stream, src.constellation, s, fiber, 8);
  const auto b = synthesize(src.stream, src.constellation, s, fiber, 8);
  CHECK(a.samples == b.samples);
  const double mean_power = a.energy() / (static_cast<double>(a.samples.size()) * a.dt);
  CHECK(mean_power * s.symbol_period == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("energy-signal power: analytic spectrum integrates to the waveform's fourth moment") {
  const auto src = shaping::make_source({64, shaping::ShapingMethod::Iid, 0.0, 1}, 1 << 15, 5);
  const auto stats = shaping::block_stats(src.stream, src.constellation);
  pulse::PulseSpec s;
  s.span_symbols = pulse::min_span_symbols(s.shape, s.rolloff);
  const auto w = synthesize(src.stream, src.constellation, s, std::nullopt, 5);
  double m4 = 0.0;
  for (const auto& v : w.samples) m4 += std::norm(v) * std::norm(v);
  m4 /= static_cast<double>(w.samples.size());
  const auto m = psd::build_pulse_model(s, pulse::FiberDispersion{}, 1);
  const auto c = psd::psd_iid(stats, m.beats, psd::NeighborWeight::Psi2d);
  double total = std::accumulate(c.values.begin(), c.values.end(), 0.0) * c.df();
  for (const auto& l : c.lines) total += l.weight;
  CHECK(total == doctest::Approx(m4).epsilon(0.02));
}

TEST_CASE("small scenario: analytic and Monte-Carlo agree") {
  ScenarioSpec sc;
  sc.name = "ess64";
  sc.source = {64, shaping::ShapingMethod::Ess, 4.8, 9};
  sc.pulse.span_symbols = pulse::min_span_symbols(sc.pulse.shape, sc.pulse.rolloff);
  sc.n_symbols = 1 << 15;
  const auto r = run_psd_scenario(sc);
  CHECK(r.deviation_2d_db < 1.0);
  CHECK(r.fmin < r.fmax);
  CHECK(r.mc.size() == r.analytic_2d.size());
}
