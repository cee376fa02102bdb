#include <cmath>

#include "doctest.h"
#include "ifspec/fft.hpp"
#include "ifspec/pulsefield.hpp"

using namespace ifspec;
using namespace ifspec::pulse;

namespace {

double rms_width(const PulseField& f) {
  double e = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = std::norm(f.samples[i]);
    const double t = f.time(i);
    e += p;
    m1 += p * t;
    m2 += p * t * t;
  }
  m1 /= e;
  return std::sqrt(m2 / e - m1 * m1);
}

PulseSpec spec_of(PulseShape shape, double rolloff = 0.1) {
  PulseSpec s;
  s.shape = shape;
  s.rolloff = rolloff;
  s.span_symbols = min_span_symbols(shape, rolloff);
  return s;
}

}  // namespace

TEST_CASE("pulses have unit energy") {
  for (auto shape : {PulseShape::Rect, PulseShape::RaisedCosine, PulseShape::RootRaisedCosine})
    CHECK(make_pulse(spec_of(shape)).energy() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("raised cosine has zero crossings at nonzero multiples of T") {
  const double T = 1.0 / 32e9;
  for (double beta : {0.05, 0.1, 0.5})
    for (int k = 1; k < 10; ++k) CHECK(std::abs(pulse_value(PulseShape::RaisedCosine, beta, T, k * T)) < 1e-12);
  // the beta*t = T/2 singular point takes its limit value
  const double v = pulse_value(PulseShape::RaisedCosine, 0.5, T, T);
  CHECK(std::isfinite(v));
}

TEST_CASE("root raised cosine is a Nyquist matched filter") {
  const auto s = spec_of(PulseShape::RootRaisedCosine, 0.1);
  const auto p = make_pulse(s);
  const auto sps = static_cast<std::size_t>(s.samples_per_symbol);
  for (std::size_t k = 0; k < 6; ++k) {
    cplx acc = 0;
    for (std::size_t i = k * sps; i < p.size(); ++i) acc += p.samples[i] * std::conj(p.samples[i - k * sps]);
    acc *= p.dt;
    CHECK(std::abs(acc - (k == 0 ? 1.0 : 0.0)) < 1e-4);
  }
}

TEST_CASE("main-lobe ratio") {
  CHECK(main_lobe_ratio(PulseShape::Rect, 0.1) == 0.5);
  CHECK(main_lobe_ratio(PulseShape::RaisedCosine, 0.1) == 1.0);
  const double a = main_lobe_ratio(PulseShape::RootRaisedCosine, 0.1);
  CHECK(std::abs(pulse_value(PulseShape::RootRaisedCosine, 0.1, 1.0, a)) < 1e-9);
  CHECK(a > 0.8);
  CHECK(a < 1.0);
}

TEST_CASE("truncation tail bound") {
  auto s = spec_of(PulseShape::RootRaisedCosine, 0.1);
  CHECK(tail_energy_fraction(s) < 1e-6);
  s.span_symbols = 4;
  CHECK(tail_energy_fraction(s) > 1e-6);
  CHECK_THROWS_AS(make_pulse(s), GridError);
}

TEST_CASE("dispersion of a Gaussian pulse follows the closed-form width") {
  const double T0 = 10e-12;
  const double dt = 0.5e-12;
  const std::size_t n = 8192;
  PulseField g;
  g.dt = dt;
  g.t0 = -0.5 * static_cast<double>(n) * dt;
  g.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.samples[i] = std::exp(-0.5 * std::pow(g.time(i) / T0, 2));
  FiberDispersion fiber;
  const double w0 = rms_width(g);
  CHECK(w0 == doctest::Approx(T0 / std::sqrt(2.0)).epsilon(1e-9));
  for (double km : {1.0, 2.5, 5.0}) {
    fiber.length = km * 1e3;
    const auto out = disperse(g, fiber);
    const double z = fiber.abs_beta2() * fiber.length / (T0 * T0);
    CHECK(rms_width(out) == doctest::Approx(w0 * std::sqrt(1 + z * z)).epsilon(1e-6));
    CHECK(out.energy() == doctest::Approx(g.energy()).epsilon(1e-12));
  }
}

TEST_CASE("zero length is the identity") {
  const auto p = make_pulse(spec_of(PulseShape::RootRaisedCosine));
  const auto q = disperse(p, FiberDispersion{});
  CHECK(q.samples == p.samples);
}

TEST_CASE("beta2 sign and magnitude") {
  FiberDispersion f;
  const double expect = -16e-6 * 1550e-9 * 1550e-9 / (2 * kPi * kSpeedOfLight);
  CHECK(f.beta2() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(f.beta2() * 1e27 == doctest::Approx(-20.4).epsilon(0.01));  // ps^2/km
}

TEST_CASE("aliasing and guard checks reject short grids") {
  const auto s = spec_of(PulseShape::RootRaisedCosine);
  const auto p = embed(make_pulse(s), 2048);
  FiberDispersion fiber;
  fiber.length = 2000e3;
  CHECK_THROWS_AS(disperse(p, fiber), GridError);
  fiber.length = 640e3;
  const auto n = analysis_grid_size(s, fiber);
  CHECK(is_power_of_two(n));
  CHECK(phase_increment_at_edge(n, p.dt, fiber.beta2(), fiber.length) < kPi);
  const auto q = disperse(embed(make_pulse(s), n), fiber);
  CHECK(guard_energy_fraction(q) < 1e-6);
}

TEST_CASE("beat spectrum matches direct quadrature") {
  auto s = spec_of(PulseShape::RootRaisedCosine);
  FiberDispersion fiber;
  fiber.length = 80e3;
  const auto p = disperse(embed(make_pulse(s), analysis_grid_size(s, fiber, 4)), fiber);
  const std::size_t n = p.size();
  const auto sps = static_cast<std::size_t>(s.samples_per_symbol);
  for (int m : {0, 1, 3}) {
    const auto g = beat_spectrum(p, m, s.samples_per_symbol);
    for (std::size_t k : {std::size_t{0}, std::size_t{5}, std::size_t{40}, n - 7}) {
      const double f = fft::bin_frequency(k, n, p.dt);
      cplx acc = 0;
      for (std::size_t i = m * sps; i < n; ++i)
        acc += p.samples[i] * std::conj(p.samples[i - m * sps]) * std::polar(1.0, -2 * kPi * f * p.time(i));
      acc *= p.dt;
      CHECK(std::abs(g[k] - acc) < 1e-9 * std::max(1.0, std::abs(acc)));
    }
  }
}

TEST_CASE("block envelope") {
  const auto s = spec_of(PulseShape::RootRaisedCosine);
  const auto p = embed(make_pulse(s), 4096);
  const auto env = block_envelope(p, 9, s.samples_per_symbol);
  CHECK(env.envelope.energy() == doctest::Approx(p.energy()).epsilon(1e-9));
  for (const auto& v : env.envelope.samples) {
    CHECK(v.imag() == 0.0);
    CHECK(v.real() >= 0.0);
  }
  CHECK(env.n_norm == doctest::Approx(9.0).epsilon(1e-6));
  // single-symbol block: envelope is |s|
  const auto one = block_envelope(p, 1, s.samples_per_symbol);
  CHECK(one.n_norm == doctest::Approx(1.0));
}

TEST_CASE("sample shifts") {
  const CVector x{1, 2, 3, 0, 0};
  CHECK(shift_samples(x, 2) == CVector{0, 0, 1, 2, 3});
  CHECK_THROWS_AS(shift_samples(x, -1), GridError);
  CHECK(shift_samples(x, -1, 1.0) == CVector{2, 3, 0, 0, 0});
}
