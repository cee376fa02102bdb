#include "ifspec/psd_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ifspec/fft.hpp"

namespace ifspec::psd {

namespace {

RVector ascending_power(const CVector& natural) {
  RVector p(natural.size());
  for (std::size_t i = 0; i < natural.size(); ++i) p[i] = std::norm(natural[i]);
  return fft::shift<double>(p);
}

RVector ascending_freqs(std::size_t n, double dt) {
  RVector f(n);
  const double df = 1.0 / (static_cast<double>(n) * dt);
  for (std::size_t i = 0; i < n; ++i) f[i] = (static_cast<double>(i) - static_cast<double>(n / 2)) * df;
  return f;
}

RVector neighbor_sum(const pulse::PulseField& field, int sps, int m_max) {
  RVector sum(field.size(), 0.0);
  for (int m = 1; m <= m_max; ++m)
    for (int sign : {1, -1}) {
      const auto g = ascending_power(pulse::beat_spectrum(field, sign * m, sps));
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
    }
  return sum;
}

double max_tail_db(const RVector& base, const RVector& extended) {
  const double peak = *std::max_element(extended.begin(), extended.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (extended[i] <= 1e-10 * peak) continue;
    if (base[i] <= 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(to_db(extended[i] / base[i])));
  }
  return worst;
}

int truncation_for(const pulse::PulseSpec& spec, double beta2_length) {
  const double T = spec.symbol_period;
  const double spread = 2.0 * kPi * beta2_length * (1.0 + spec.rolloff) / T;
  const int span = spec.shape == pulse::PulseShape::Rect ? 1 : spec.span_symbols;
  return static_cast<int>(std::ceil(spread / T)) + span;
}

}  // namespace

int default_truncation(const pulse::PulseSpec& spec, const pulse::FiberDispersion& fiber) {
  return truncation_for(spec, fiber.abs_beta2() * fiber.length);
}

BeatSpectra compute_beats(const pulse::PulseField& dispersed, const pulse::PulseSpec& spec, DispersionState state,
                          int truncation) {
  const int sps = spec.samples_per_symbol;
  const std::size_t n = dispersed.size();
  if (!is_power_of_two(n) || n % static_cast<std::size_t>(sps) != 0)
    throw GridError("analysis grid must be a power of two and a multiple of the samples per symbol");
  const int m_limit = static_cast<int>((n - 1) / static_cast<std::size_t>(sps));

  BeatSpectra b;
  b.pulse = spec;
  b.state = state;
  b.grid = n;
  b.dt = dispersed.dt;
  b.freqs = ascending_freqs(n, dispersed.dt);
  b.g0 = ascending_power(pulse::beat_spectrum(dispersed, 0, sps));

  int m = truncation;
  const bool automatic = m < 0;
  if (automatic) m = truncation_for(spec, std::abs(state.beta2) * state.length);
  m = std::min(std::max(m, 1), m_limit);
  RVector base = neighbor_sum(dispersed, sps, m);
  for (;;) {
    const int m_ext = std::min(2 * m, m_limit);
    if (m_ext == m) {
      b.tail_db = 0.0;
      break;
    }
    RVector ext = base;
    const RVector extra = [&] {
      RVector s(n, 0.0);
      for (int k = m + 1; k <= m_ext; ++k)
        for (int sign : {1, -1}) {
          const auto g = ascending_power(pulse::beat_spectrum(dispersed, sign * k, sps));
          for (std::size_t i = 0; i < n; ++i) s[i] += g[i];
        }
      return s;
    }();
    for (std::size_t i = 0; i < n; ++i) ext[i] += extra[i];
    b.tail_db = max_tail_db(base, ext);
    if (b.tail_db < 0.1) break;
    if (!automatic) throw GridError("neighbor-sum truncation M = " + std::to_string(m) + " leaves a tail of " +
                                    std::to_string(b.tail_db) + " dB");
    m = m_ext;
    base = std::move(ext);
  }
  b.truncation = m;
  b.neighbor = std::move(base);

  const double T = spec.symbol_period;
  const double df = 1.0 / (static_cast<double>(n) * dispersed.dt);
  const double peak = b.g0[n / 2];
  const auto bins_per_line = static_cast<long long>(std::llround(1.0 / (T * df)));
  for (long long l = -(static_cast<long long>(n / 2) / bins_per_line); l * bins_per_line < static_cast<long long>(n / 2);
       ++l) {
    const auto idx = static_cast<std::size_t>(static_cast<long long>(n / 2) + l * bins_per_line);
    if (b.g0[idx] > 1e-12 * peak) b.unit_lines.push_back({static_cast<double>(l) / T, b.g0[idx]});
  }
  return b;
}

EnvelopeSpectrum compute_envelope(const pulse::PulseField& dispersed, const pulse::PulseSpec& spec,
                                  DispersionState state, int block_length) {
  const auto env = pulse::block_envelope(dispersed, block_length, spec.samples_per_symbol);
  EnvelopeSpectrum e;
  e.state = state;
  e.block_length = block_length;
  e.n_norm = env.n_norm;
  e.h0 = ascending_power(env.spectrum);
  return e;
}

PulseModel build_pulse_model(const pulse::PulseSpec& spec, const pulse::FiberDispersion& fiber, int block_length,
                             std::size_t grid) {
  const std::size_t n = grid == 0 ? pulse::analysis_grid_size(spec, fiber, block_length) : grid;
  if (!is_power_of_two(n)) throw ConfigError("analysis grid must be a power of two");
  const DispersionState state{fiber.beta2(), fiber.length};
  PulseModel pm;
  pm.field = pulse::disperse(pulse::embed(pulse::make_pulse(spec), n), fiber);
  pm.beats = compute_beats(pm.field, spec, state);
  pm.envelope = compute_envelope(pm.field, spec, state, block_length);
  return pm;
}

double neighbor_coefficient(const shaping::BlockStats& stats, NeighborWeight w) {
  return w == NeighborWeight::TwoMuE2 ? 2.0 * stats.mu_E * stats.mu_E : stats.psi_2d;
}

namespace {

void check_pair(const BeatSpectra& beats, const EnvelopeSpectrum& env, const shaping::BlockStats& stats) {
  if (!(beats.state == env.state)) throw ModelError("beat and envelope spectra come from different dispersion states");
  if (beats.g0.size() != env.h0.size()) throw ModelError("beat and envelope spectra use different grids");
  if (env.block_length != stats.block_length)
    throw ModelError("envelope block length " + std::to_string(env.block_length) + " differs from the statistics (" +
                     std::to_string(stats.block_length) + ")");
}

void check_beats(const BeatSpectra& beats) {
  if (beats.g0.empty() || beats.neighbor.size() != beats.g0.size()) throw ModelError("missing beat spectra");
}

}  // namespace

PsdDecomposition decompose(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env,
                           NeighborWeight weight) {
  check_beats(beats);
  check_pair(beats, env, stats);
  const double T = beats.pulse.symbol_period;
  const std::size_t n = beats.g0.size();
  PsdDecomposition d;
  d.weight = weight;
  d.freqs = beats.freqs;
  for (const auto& l : beats.unit_lines)
    d.lines.push_back({l.frequency, stats.mu_E * stats.mu_E / (T * T) * l.weight});
  d.self_beating.resize(n);
  d.shaping_correction.resize(n);
  d.neighbor_beating.resize(n);
  d.total.resize(n);
  const double c_self = stats.sigma_E2 / T;
  const double c_corr = -(stats.mu_sigma_blk2 - (stats.block_length - 1) * stats.sigma_mu_blk2) / T;
  const double c_nb = neighbor_coefficient(stats, weight) / T;
  for (std::size_t i = 0; i < n; ++i) {
    d.self_beating[i] = c_self * beats.g0[i];
    d.neighbor_beating[i] = c_nb * beats.neighbor[i];
    d.shaping_correction[i] = c_corr * env.h0[i];
    d.total[i] = d.self_beating[i] + d.neighbor_beating[i];
    d.total[i] += d.shaping_correction[i];
  }
  return d;
}

PsdCurve psd_iid(const shaping::BlockStats& stats, const BeatSpectra& beats, NeighborWeight weight) {
  check_beats(beats);
  const double T = beats.pulse.symbol_period;
  PsdCurve c;
  c.freqs = beats.freqs;
  for (const auto& l : beats.unit_lines)
    c.lines.push_back({l.frequency, stats.mu_E * stats.mu_E / (T * T) * l.weight});
  const double c_self = stats.sigma_E2 / T;
  const double c_nb = neighbor_coefficient(stats, weight) / T;
  c.values.resize(beats.g0.size());
  for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] = c_self * beats.g0[i] + c_nb * beats.neighbor[i];
  return c;
}

namespace {

PsdCurve shaped(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env,
                NeighborWeight weight) {
  check_pair(beats, env, stats);
  PsdCurve c = psd_iid(stats, beats, weight);
  const double T = beats.pulse.symbol_period;
  const double c_corr = -(stats.mu_sigma_blk2 - (stats.block_length - 1) * stats.sigma_mu_blk2) / T;
  for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] += c_corr * env.h0[i];
  return c;
}

}  // namespace

PsdCurve psd_shaped_1d(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env) {
  return shaped(stats, beats, env, NeighborWeight::TwoMuE2);
}

PsdCurve psd_shaped_2d(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env) {
  return shaped(stats, beats, env, NeighborWeight::Psi2d);
}

std::optional<NegativeBin> find_negative(const RVector& freqs, const RVector& values, double rel_tol) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  std::optional<NegativeBin> worst;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < -rel_tol * peak && (!worst || values[i] < worst->value)) worst = NegativeBin{freqs[i], values[i]};
  return worst;
}

void require_nonnegative(const PsdCurve& curve, double rel_tol) {
  if (const auto bad = find_negative(curve.freqs, curve.values, rel_tol))
    throw ModelError("PSD model is negative (" + std::to_string(bad->value) + ") at f = " +
                     std::to_string(bad->frequency) + " Hz");
}

bool near_line(double f, double symbol_period, double df, int guard_bins) {
  const double l = std::round(f * symbol_period);
  return std::abs(f - l / symbol_period) <= guard_bins * df + 1e-9 * df;
}

double band_mean_abs_db(const PsdCurve& a, const PsdCurve& b, double fmin, double fmax, double symbol_period) {
  if (a.size() != b.size()) throw ModelError("curves are on different grids");
  const double df = a.df();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.freqs[i] - b.freqs[i]) > 1e-9 * df) throw ModelError("curves are on different grids");
    const double f = a.freqs[i];
    if (f < fmin || f > fmax || near_line(f, symbol_period, df)) continue;
    if (a.values[i] <= 0.0 || b.values[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += std::abs(to_db(a.values[i] / b.values[i]));
    ++count;
  }
  if (count == 0) throw ModelError("comparison band holds no bins");
  return sum / static_cast<double>(count);
}

double value_at(const PsdCurve& c, double f) {
  const auto it = std::min_element(c.freqs.begin(), c.freqs.end(),
                                   [f](double x, double y) { return std::abs(x - f) < std::abs(y - f); });
  return c.values[static_cast<std::size_t>(it - c.freqs.begin())];
}

}  // namespace ifspec::psd
