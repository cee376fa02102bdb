#include <cmath>
#include <random>

#include "doctest.h"
#include "ifspec/design_rules.hpp"

using namespace ifspec;
using namespace ifspec::design;

namespace {

DipModelInputs link(int n_s, double km, double gbaud = 32.0) {
  DipModelInputs in;
  in.n_s = n_s;
  in.length = km * 1e3;
  in.symbol_rate = gbaud * 1e9;
  return in;
}

}  // namespace

TEST_CASE("block durations by hand") {
  const auto in = link(18, 0.0);
  CHECK(block_duration(in) == doctest::Approx(19.0 / 32e9));
  CHECK(dispersed_duration(in) == block_duration(in));
  CHECK(dip_width(in) == doctest::Approx(2.0 * 32e9 / 19.0));
  const auto d = link(18, 640.0);
  // 1.1 * 16e-6 * 640e3 * 32e9 * 1550e-9^2 / c
  const double broadening = 1.1 * 16e-6 * 640e3 * 32e9 * 1550e-9 * 1550e-9 / kSpeedOfLight;
  CHECK(dispersive_broadening(d) == doctest::Approx(broadening).epsilon(1e-14));
  CHECK(dispersed_duration(d) == doctest::Approx(19.0 / 32e9 + broadening));
}

TEST_CASE("optimal rates by hand") {
  const auto in = link(18, 240.0);
  const double expect = std::sqrt(19.0 * kSpeedOfLight / (1.1 * 16e-6 * 240e3 * 1550e-9 * 1550e-9));
  CHECK(opt_rate_shaped(in) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(opt_rate_unshaped(in) == doctest::Approx(std::sqrt(2.0 * kSpeedOfLight / (1.1 * 16e-6 * 240e3 * 1550e-9 * 1550e-9))));
  CHECK(std::isinf(opt_rate_shaped(link(18, 0.0))));
  CHECK(std::isinf(opt_rate_unshaped(link(1, 0.0))));
}

TEST_CASE("closed-form optimum is the numeric argmax over a parameter sweep") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> ns(1, 100);
  std::uniform_real_distribution<double> km(50.0, 5000.0), a(0.5, 1.0), beta(0.0, 0.5), d(2.0, 20.0);
  for (int t = 0; t < 100; ++t) {
    DipModelInputs in;
    in.n_s = ns(rng);
    in.length = km(rng) * 1e3;
    in.a = a(rng);
    in.kappa_beta = 1.0 + beta(rng);
    in.dispersion = d(rng) * kPsPerNmKm;
    const double closed = opt_rate_shaped(in);
    CHECK(numeric_opt_rate(in) == doctest::Approx(closed).epsilon(1e-6));
  }
}

TEST_CASE("unshaped law three ways") {
  for (double km : {100.0, 800.0, 3000.0})
    for (double a : {0.5, 0.9, 1.0}) {
      auto in = link(1, km);
      in.a = a;
      in.kappa_beta = 1.05;
      const double u = opt_rate_unshaped(in);
      CHECK(opt_rate_shaped(in) == doctest::Approx(u).epsilon(1e-14));
      RatePreset p{PresetName::ThisWorkUnshaped, 2 * a, in.kappa_beta};
      CHECK(general_rate(p, in) == doctest::Approx(u).epsilon(1e-12));
      CHECK(general_rate(make_preset(PresetName::ThisWorkUnshaped, in), in) == doctest::Approx(u).epsilon(1e-12));
    }
}

TEST_CASE("presets") {
  const auto in = link(18, 800.0);
  const auto shaped = make_preset(PresetName::ThisWorkShaped, in);
  CHECK(general_rate(shaped, in) == doctest::Approx(opt_rate_shaped(in)).epsilon(1e-12));
  CHECK_THROWS_AS(make_preset(PresetName::Poggiolini, in), ConfigError);
  const auto w = make_preset(PresetName::Wang, in, 1.0);
  CHECK(w.nu == doctest::Approx(1.0));
  CHECK(parse_preset("poggiolini") == PresetName::Poggiolini);
  CHECK(to_string(PresetName::ThisWorkShaped) == "this_work_shaped");
  CHECK_THROWS_AS(parse_preset("gn"), ConfigError);
}

TEST_CASE("monotonicity") {
  for (double km : {160.0, 640.0}) {
    double prev_w = INFINITY, prev_r = 0;
    for (int n : {1, 9, 18, 27, 81}) {
      const auto in = link(n, km);
      CHECK(dip_width(in) < prev_w);
      CHECK(opt_rate_shaped(in) > prev_r);
      prev_w = dip_width(in);
      prev_r = opt_rate_shaped(in);
    }
  }
  CHECK(dip_width(link(18, 640)) < dip_width(link(18, 160)));
  CHECK(opt_rate_shaped(link(18, 640)) < opt_rate_shaped(link(18, 160)));
}

TEST_CASE("input validation") {
  auto in = link(0, 10.0);
  CHECK_THROWS_AS(validate(in), ConfigError);
  in = link(9, -1.0);
  CHECK_THROWS_AS(validate(in), ConfigError);
  in = link(9, 10.0);
  in.symbol_rate = 0;
  CHECK_THROWS_AS(validate(in), ConfigError);
}

TEST_CASE("golden-section search") {
  const double x = golden_section_max([](double v) { return -(v - 2.5) * (v - 2.5); }, 0.0, 10.0);
  CHECK(x == doctest::Approx(2.5).epsilon(1e-8));
}

TEST_CASE("dip measurement on a synthetic notch") {
  // 1 - exp(-(f/f0)^2): half-plateau crossings at f0 sqrt(ln 2)
  const double T = 1.0, f0 = 0.02;
  RVector f, v;
  for (int i = -4096; i < 4096; ++i) {
    f.push_back(i / 8192.0);
    v.push_back(1.0 - std::exp(-std::pow(f.back() / f0, 2)));
  }
  const auto m = measure_dip_width(f, v, T);
  CHECK(m.plateau == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.width == doctest::Approx(2 * f0 * std::sqrt(std::log(2.0))).epsilon(1e-3));
  CHECK(m.left == doctest::Approx(-m.right).epsilon(1e-9));
  const RVector flat(f.size(), 1.0);
  CHECK(measure_dip_width(f, flat, T).width == 0.0);
}

TEST_CASE("800 km broadening in explicit units") {
  // D [ps/(nm km)] * L [km] * dlambda [nm] gives ps; dlambda = lambda^2 R / c.
  const double dlambda_nm = 1550e-9 * 1550e-9 * 32e9 / kSpeedOfLight * 1e9;
  const double ps = 1.1 * 16.0 * 800.0 * dlambda_nm;
  CHECK(dispersive_broadening(link(18, 800.0)) == doctest::Approx(ps * 1e-12).epsilon(1e-12));
}

TEST_CASE("inverse square-root law and convexity") {
  CHECK(opt_rate_unshaped(link(1, 4 * 300.0)) == doctest::Approx(opt_rate_unshaped(link(1, 300.0)) / 2));
  // T_b' as a function of R_s has a single interior minimum at the optimal rate
  const auto base = link(18, 800.0);
  const double r = opt_rate_shaped(base);
  double prev = INFINITY;
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    auto in = base;
    in.symbol_rate = r * f;
    CHECK(dispersed_duration(in) < prev);
    prev = dispersed_duration(in);
  }
  for (double f : {1.25, 1.5, 2.0}) {
    auto in = base;
    in.symbol_rate = r * f;
    CHECK(dispersed_duration(in) > prev);
    prev = dispersed_duration(in);
  }
}

TEST_CASE("literature presets bracket the unshaped law") {
  auto in = link(1, 800.0);
  in.kappa_beta = 1.05;
  CHECK(make_preset(PresetName::Wang, in, 1.0).nu == 1.0);
  for (double ratio : {1.0, 1.25, 1.5}) {
    const double pog = general_rate(make_preset(PresetName::Poggiolini, in, ratio), in);
    const double wang = general_rate(make_preset(PresetName::Wang, in, ratio), in);
    const double ours = opt_rate_unshaped(in);
    CHECK(wang < ours);
    CHECK(ours < pog);
  }
}
