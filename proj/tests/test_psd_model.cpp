#include <cmath>

#include "doctest.h"
#include "ifspec/block_stream.hpp"
#include "ifspec/psd_model.hpp"

using namespace ifspec;
using namespace ifspec::psd;

namespace {

pulse::PulseSpec rrc() {
  pulse::PulseSpec s;
  s.span_symbols = pulse::min_span_symbols(s.shape, s.rolloff);
  return s;
}

shaping::BlockStats stats_of(const shaping::SourceSpec& spec, std::size_t n = 1 << 14) {
  const auto src = shaping::make_source(spec, n, 1);
  return shaping::block_stats(src.stream, src.constellation);
}

}  // namespace

TEST_CASE("single-symbol blocks reduce the shaped models to the i.i.d. model bin for bin") {
  const auto stats = stats_of({64, shaping::ShapingMethod::Iid, 0.0, 1});
  REQUIRE(stats.c_corr == 0.0);
  for (double km : {0.0, 160.0}) {
    pulse::FiberDispersion fiber;
    fiber.length = km * 1e3;
    const auto m = build_pulse_model(rrc(), fiber, 1);
    const auto iid = psd_iid(stats, m.beats);
    const auto one = psd_shaped_1d(stats, m.beats, m.envelope);
    const auto two = psd_shaped_2d(stats, m.beats, m.envelope);
    const auto iid2 = psd_iid(stats, m.beats, NeighborWeight::Psi2d);
    CHECK(one.values == iid.values);
    CHECK(two.values == iid2.values);
  }
}

TEST_CASE("2D model with Psi_2D = 2 mu_E^2 is the 1D model") {
  auto stats = stats_of({64, shaping::ShapingMethod::Ess, 4.8, 9});
  stats.psi_2d = 2 * stats.mu_E * stats.mu_E;
  const auto m = build_pulse_model(rrc(), pulse::FiberDispersion{}, 9);
  const auto a = psd_shaped_1d(stats, m.beats, m.envelope);
  const auto b = psd_shaped_2d(stats, m.beats, m.envelope);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-14));
}

TEST_CASE("rectangular pulses: self term is a squared Dirichlet kernel, no neighbor beating") {
  pulse::PulseSpec s;
  s.shape = pulse::PulseShape::Rect;
  s.samples_per_symbol = 8;
  const auto stats = stats_of({16, shaping::ShapingMethod::Iid, 0.0, 1});
  const auto m = build_pulse_model(s, pulse::FiberDispersion{}, 1, 1024);
  const auto c = psd_iid(stats, m.beats);
  const double T = s.symbol_period, dt = T / s.samples_per_symbol;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double f = c.freqs[i];
    double d2 = 1.0;
    if (f != 0.0) {
      const double d = std::sin(kPi * f * T) / (8 * std::sin(kPi * f * dt));
      d2 = d * d;
    }
    CHECK(c.values[i] == doctest::Approx(stats.sigma_E2 / T * d2).epsilon(1e-9).scale(stats.sigma_E2 / T));
    CHECK(std::abs(m.beats.neighbor[i]) < 1e-25);
  }
  for (const auto& l : c.lines) {
    const double expect = std::abs(l.frequency) < 1.0 ? stats.mu_E * stats.mu_E / (T * T) : 0.0;
    CHECK(l.weight == doctest::Approx(expect).scale(stats.mu_E * stats.mu_E / (T * T)).epsilon(1e-12));
  }
}

TEST_CASE("decomposition adds up and matches the 2D model") {
  const auto stats = stats_of({256, shaping::ShapingMethod::Ccdm, 6.0, 27});
  pulse::FiberDispersion fiber;
  fiber.length = 160e3;
  const auto m = build_pulse_model(rrc(), fiber, 27);
  const auto d = decompose(stats, m.beats, m.envelope);
  const auto two = psd_shaped_2d(stats, m.beats, m.envelope);
  for (std::size_t i = 0; i < d.total.size(); ++i) {
    CHECK(d.total[i] == doctest::Approx(d.self_beating[i] + d.shaping_correction[i] + d.neighbor_beating[i]));
    CHECK(d.total[i] == doctest::Approx(two.values[i]).epsilon(1e-13));
    CHECK(d.shaping_correction[i] <= 0.0);
  }
  CHECK(m.beats.tail_db < 0.1);
  CHECK(m.beats.truncation >= default_truncation(rrc(), fiber));
}

TEST_CASE("shaped PSDs stay nonnegative") {
  for (auto method : {shaping::ShapingMethod::Ccdm, shaping::ShapingMethod::Ess})
    for (double km : {0.0, 640.0}) {
      const auto stats = stats_of({64, method, 4.8, 18});
      pulse::FiberDispersion fiber;
      fiber.length = km * 1e3;
      const auto m = build_pulse_model(rrc(), fiber, 18);
      CHECK_NOTHROW(require_nonnegative(psd_shaped_2d(stats, m.beats, m.envelope)));
    }
  PsdCurve bad;
  bad.freqs = {-1, 0, 1};
  bad.values = {1, -0.5, 1};
  CHECK_THROWS_AS(require_nonnegative(bad), ModelError);
}

TEST_CASE("neighbor coefficient forms") {
  shaping::BlockStats s;
  s.mu_E = 1.0;
  s.psi_2d = 1.2;
  CHECK(neighbor_coefficient(s, NeighborWeight::TwoMuE2) == 2.0);
  CHECK(neighbor_coefficient(s, NeighborWeight::Psi2d) == 1.2);
}

TEST_CASE("band comparison helpers") {
  const double T = 1.0;
  PsdCurve a;
  for (int i = -64; i < 64; ++i) a.freqs.push_back(i / 64.0);
  a.values.assign(a.freqs.size(), 1.0);
  PsdCurve b = a;
  CHECK(band_mean_abs_db(a, b, 0.05, 0.4, T) == 0.0);
  for (auto& v : b.values) v = 2.0;
  CHECK(band_mean_abs_db(a, b, 0.05, 0.4, T) == doctest::Approx(10 * std::log10(2.0)));
  CHECK(near_line(1.0 + 1.0 / 64, T, 1.0 / 64));
  CHECK_FALSE(near_line(0.5, T, 1.0 / 64));
  CHECK(value_at(a, 0.26) == 1.0);
}
