#include "ifspec/xpm_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>

#include "ifspec/fft.hpp"

namespace ifspec::xpm {

double LinkSpec::gamma() const { return 2.0 * kPi * n2 / (wavelength * a_eff); }

double LinkSpec::beta2() const {
  return -dispersion_ps_nm_km * kPsPerNmKm * wavelength * wavelength / (2.0 * kPi * kSpeedOfLight);
}

double LinkSpec::alpha() const { return alpha_db_km / (10.0 * std::log10(std::exp(1.0))) / 1e3; }

void validate(const LinkSpec& link) {
  if (!(link.span_length > 0.0)) throw ConfigError("span length must be positive");
  if (link.n_spans < 1) throw ConfigError("need at least one span");
  if (link.dispersion_ps_nm_km < 0.0) throw ConfigError("dispersion must be nonnegative");
  if (link.n2 < 0.0) throw ConfigError("n2 must be nonnegative");
  if (!(link.a_eff > 0.0)) throw ConfigError("effective area must be positive");
  if (link.alpha_db_km < 0.0) throw ConfigError("attenuation must be nonnegative");
  if (!(link.wavelength > 0.0)) throw ConfigError("wavelength must be positive");
}

void validate(const ChannelPlan& plan) {
  if (plan.pump_power < 0.0 || plan.probe_power < 0.0) throw ConfigError("channel powers must be nonnegative");
  if (!(plan.symbol_rate > 0.0)) throw ConfigError("symbol rate must be positive");
  if (plan.rolloff < 0.0 || plan.rolloff > 1.0) throw ConfigError("roll-off must lie in [0, 1]");
  if (!(plan.spacing > (1.0 + plan.rolloff) * plan.symbol_rate))
    throw ConfigError("channel spacing does not exceed the pump bandwidth; the channels overlap");
  if (plan.n_symbols < 64) throw ConfigError("pump stream too short");
  if (plan.samples_per_symbol != 0 && plan.samples_per_symbol < 4)
    throw ConfigError("need at least 4 samples per symbol");
}

int default_samples_per_symbol(const ChannelPlan& plan) {
  const double need = 2.0 * plan.spacing + (1.0 + plan.rolloff) * plan.symbol_rate;
  int sps = 4;
  while (sps * plan.symbol_rate < need) sps *= 2;
  return sps;
}

double default_step(const ChannelPlan& plan, const LinkSpec& link) {
  const double walk = std::abs(link.beta2()) * 2.0 * kPi * plan.spacing;  // s/m
  double h = link.span_length;
  if (walk > 0.0) h = std::min(h, 1.0 / (plan.symbol_rate * walk) / 8.0);
  const double n = std::ceil(link.span_length / h - 1e-9);
  return link.span_length / n;
}

namespace {

int steps_per_span(const LinkSpec& link, double step) {
  if (!(step > 0.0)) throw ConfigError("SSFM step must be positive");
  const double n = link.span_length / step;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-6 * r) throw ConfigError("SSFM step must divide the span length");
  return static_cast<int>(r);
}

}  // namespace

mc::Waveform ssfm_propagate(const mc::Waveform& input, const LinkSpec& link, double step,
                            const std::function<void(int, const CVector&)>& on_span) {
  validate(link);
  const int steps = steps_per_span(link, step);
  const double h = link.span_length / steps;
  const std::size_t n = input.samples.size();
  const double alpha = link.alpha();
  const double gamma = link.gamma();
  const double beta2 = link.beta2();
  const double h_eff = alpha > 0.0 ? 2.0 * std::sinh(alpha * h / 2.0) / alpha : h;

  CVector half(n), full(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 2.0 * kPi * fft::bin_frequency(i, n, input.dt);
    const cplx op(-alpha / 2.0, 0.5 * beta2 * w * w);
    half[i] = std::exp(op * (h / 2.0));
    full[i] = std::exp(op * h);
  }
  const double gain = link.amplifiers ? std::exp(alpha * link.span_length / 2.0) : 1.0;

  mc::Waveform out = input;
  auto& a = out.samples;
  for (int span = 1; span <= link.n_spans; ++span) {
    fft::forward(a);
    for (std::size_t i = 0; i < n; ++i) a[i] *= half[i];
    fft::inverse(a);
    for (int k = 0; k < steps; ++k) {
      if (gamma > 0.0)
        for (auto& v : a) v *= std::polar(1.0, gamma * std::norm(v) * h_eff);
      fft::forward(a);
      const auto& op = k + 1 < steps ? full : half;
      for (std::size_t i = 0; i < n; ++i) a[i] *= op[i];
      fft::inverse(a);
    }
    if (gain != 1.0)
      for (auto& v : a) v *= gain;
    if (on_span) on_span(span, a);
  }
  return out;
}

RVector extract_probe_phase(const CVector& field, double dt, double probe_offset, double bandwidth) {
  const std::size_t n = field.size();
  CVector spec = field;
  fft::forward(spec);
  const double df = 1.0 / (static_cast<double>(n) * dt);
  const double k0d = probe_offset / df;
  const auto k0 = static_cast<long long>(std::llround(k0d));
  if (std::abs(k0d - static_cast<double>(k0)) > 1e-6) throw GridError("probe frequency is not on an FFT bin");
  CVector base(n, cplx{});
  const auto nn = static_cast<long long>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = fft::bin_frequency(i, n, dt);
    if (std::abs(f - probe_offset) < bandwidth / 2.0) {
      const long long j = ((static_cast<long long>(i) - k0) % nn + nn) % nn;
      base[static_cast<std::size_t>(j)] = spec[i];
    }
  }
  fft::inverse(base);

  RVector phi(n);
  double prev = 0.0, offset = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::arg(base[i]);
    if (i > 0) {
      const double d = p - prev;
      if (d > kPi) offset -= 2.0 * kPi;
      else if (d < -kPi) offset += 2.0 * kPi;
    }
    prev = p;
    phi[i] = p + offset;
  }
  // Least-squares line over the sample index.
  const double m = static_cast<double>(n);
  const double xbar = (m - 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : phi) ybar += v;
  ybar /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) - xbar;
    sxy += x * (phi[i] - ybar);
    sxx += x * x;
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  for (std::size_t i = 0; i < n; ++i) phi[i] -= ybar + slope * (static_cast<double>(i) - xbar);
  return phi;
}

namespace {

int cached_span(double rolloff) {
  static std::mutex mu;
  static std::map<double, int> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(rolloff);
  if (it == cache.end())
    it = cache.emplace(rolloff, pulse::min_span_symbols(pulse::PulseShape::RootRaisedCosine, rolloff)).first;
  return it->second;
}

double variance(const RVector& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size());
}

}  // namespace

PhaseNoiseResult run_pump_probe(const ChannelPlan& plan, const LinkSpec& link, std::uint64_t seed, double step) {
  validate(plan);
  validate(link);
  const int sps = plan.samples_per_symbol ? plan.samples_per_symbol : default_samples_per_symbol(plan);
  if (sps * plan.symbol_rate < 2.0 * plan.spacing + (1.0 + plan.rolloff) * plan.symbol_rate)
    throw ConfigError("sample rate does not cover both channels");
  if (step == 0.0) step = default_step(plan, link);

  auto source = shaping::make_source(plan.pump_source, plan.n_symbols, seed);
  // Whole blocks may overshoot; the cyclic grid needs exactly n_symbols.
  source.stream.symbols.resize(plan.n_symbols);
  pulse::PulseSpec ps;
  ps.shape = pulse::PulseShape::RootRaisedCosine;
  ps.rolloff = plan.rolloff;
  ps.symbol_period = 1.0 / plan.symbol_rate;
  ps.samples_per_symbol = sps;
  ps.span_symbols = cached_span(plan.rolloff);
  auto wave = mc::synthesize(source.stream, source.constellation, ps, std::nullopt, seed);

  const std::size_t n = wave.samples.size();
  double mean_power = 0.0;
  for (const auto& v : wave.samples) mean_power += std::norm(v);
  mean_power /= static_cast<double>(n);
  const double scale = mean_power > 0.0 ? std::sqrt(plan.pump_power / mean_power) : 0.0;

  const double df = 1.0 / (static_cast<double>(n) * wave.dt);
  const double kd = 0.5 * plan.spacing / df;
  const auto k = static_cast<long long>(std::llround(kd));
  if (std::abs(kd - static_cast<double>(k)) > 1e-6)
    throw GridError("half the channel spacing is not a multiple of the frequency resolution");
  // Multiplexer: the pump is confined to its slot, so truncation sidelobes
  // cannot leak linearly into the probe band.
  fft::forward(wave.samples);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(fft::bin_frequency(i, n, wave.dt)) >= 0.5 * plan.spacing) wave.samples[i] = cplx{};
  fft::inverse(wave.samples);
  const double probe_amp = std::sqrt(plan.probe_power);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = 2.0 * kPi * static_cast<double>((static_cast<long long>(i) * k) % static_cast<long long>(n)) /
                      static_cast<double>(n);
    wave.samples[i] = wave.samples[i] * scale * std::polar(1.0, -ph) + probe_amp * std::polar(1.0, ph);
  }

  PhaseNoiseResult r;
  r.step = step;
  r.samples_per_symbol = sps;
  r.grid = n;
  r.information_rate = source.information_rate;
  mc::WelchConfig wc;
  wc.segment_len = std::max<std::size_t>(64, std::bit_floor(n / 16));
  ssfm_propagate(wave, link, step, [&](int, const CVector& a) {
    const auto phi = extract_probe_phase(a, wave.dt, 0.5 * plan.spacing, plan.spacing);
    r.per_span_variance.push_back(variance(phi));
    r.phase_psd.push_back(mc::welch_psd(phi, wave.dt, wc));
  });
  return r;
}

double max_relative_change(const RVector& a, const RVector& b, double floor) {
  if (a.size() != b.size()) throw ConfigError("variance lists differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < floor && b[i] < floor) continue;
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(a[i], b[i]));
  }
  return worst;
}

PhaseNoiseResult run_converged(const ChannelPlan& plan, const LinkSpec& link, std::uint64_t seed, double rel_tol,
                               int max_halvings) {
  double step = default_step(plan, link);
  auto coarse = run_pump_probe(plan, link, seed, step);
  for (int i = 0; i < max_halvings; ++i) {
    step /= 2.0;
    auto fine = run_pump_probe(plan, link, seed, step);
    if (max_relative_change(coarse.per_span_variance, fine.per_span_variance) < rel_tol) return fine;
    coarse = std::move(fine);
  }
  throw ConvergenceError("per-span phase variance did not settle within " + std::to_string(max_halvings) +
                         " step halvings");
}

RateSweep sweep_symbol_rate(const ChannelPlan& plan, const RVector& rates, LinkSpec link, const std::vector<int>& spans,
                            std::uint64_t seed, bool converge) {
  if (rates.empty() || spans.empty()) throw ConfigError("sweep needs rates and span counts");
  RateSweep s;
  s.rates = rates;
  s.spans = spans;
  link.n_spans = *std::max_element(spans.begin(), spans.end());
  for (double rate : rates) {
    ChannelPlan p = plan;
    p.symbol_rate = rate;
    const auto r = converge ? run_converged(p, link, seed) : run_pump_probe(p, link, seed);
    RVector v;
    for (int n : spans) v.push_back(r.per_span_variance.at(static_cast<std::size_t>(n - 1)));
    s.variance.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < spans.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rates.size(); ++i)
      if (s.variance[i][j] < s.variance[best][j]) best = i;
    s.best_rate.push_back(rates[best]);
  }
  return s;
}

}  // namespace ifspec::xpm
