#include "ifspec/mc_engine.hpp"

#include <cmath>

#include "ifspec/design_rules.hpp"
#include "ifspec/fft.hpp"

namespace ifspec::mc {

double Waveform::energy() const {
  double e = 0.0;
  for (const auto& v : samples) e += std::norm(v);
  return e * dt;
}

Waveform synthesize(const shaping::ShapedBlockStream& stream, const shaping::Constellation& c,
                    const pulse::PulseSpec& spec, const std::optional<pulse::FiberDispersion>& fiber,
                    std::uint64_t seed) {
  if (stream.symbols.empty()) throw ConfigError("cannot synthesize an empty stream");
  const auto pulse = pulse::make_pulse(spec);
  const int sps = spec.samples_per_symbol;
  const std::size_t n = stream.symbols.size() * static_cast<std::size_t>(sps);
  if (n > (std::size_t{1} << 26)) throw GridError("waveform exceeds the desk-scale memory bound");

  CVector train(n, cplx{});
  for (std::size_t k = 0; k < stream.symbols.size(); ++k) {
    const int idx = stream.symbols[k];
    if (idx < 0 || static_cast<std::size_t>(idx) >= c.points.size()) throw ConfigError("symbol index out of range");
    train[k * static_cast<std::size_t>(sps)] = c.points[static_cast<std::size_t>(idx)];
  }
  // Pulse wrapped onto the period with t = 0 at index 0.
  CVector kernel(n, cplx{});
  for (std::size_t i = 0; i < pulse.size(); ++i) {
    const auto k = static_cast<long long>(std::llround(pulse.time(i) / pulse.dt));
    const auto nn = static_cast<long long>(n);
    kernel[static_cast<std::size_t>(((k % nn) + nn) % nn)] += pulse.samples[i];
  }
  fft::forward(train);
  fft::forward(kernel);
  for (std::size_t i = 0; i < n; ++i) train[i] *= kernel[i];
  if (fiber && fiber->length > 0.0) {
    const auto h = pulse::dispersion_kernel(n, pulse.dt, fiber->beta2(), fiber->length);
    for (std::size_t i = 0; i < n; ++i) train[i] *= h[i];
  }
  fft::inverse(train);

  Waveform w;
  w.samples = std::move(train);
  w.dt = pulse.dt;
  w.symbol_rate = 1.0 / spec.symbol_period;
  w.samples_per_symbol = sps;
  w.seed = seed;
  w.meta = shaping::to_string(stream.method) + " n_s=" + std::to_string(stream.block_length) + " pulse=" +
           pulse::to_string(spec.shape) + " L=" + std::to_string(fiber ? fiber->length : 0.0);
  return w;
}

void validate(const WelchConfig& cfg) {
  if (!is_power_of_two(cfg.segment_len)) throw ConfigError("Welch segment length must be a power of two");
  if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0)) throw ConfigError("Welch overlap must lie in [0, 1)");
}

psd::PsdCurve welch_psd(const RVector& x, double dt, const WelchConfig& cfg) {
  validate(cfg);
  const std::size_t len = cfg.segment_len;
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(len * (1.0 - cfg.overlap))));
  if (x.size() < len) throw ConfigError("signal shorter than one Welch segment");
  const std::size_t segments = (x.size() - len) / hop + 1;
  if (segments < 8)
    throw ConfigError("only " + std::to_string(segments) + " Welch segments; at least 8 are required");

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());

  RVector win(len);
  double win_power = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(len));
    win_power += win[i] * win[i];
  }
  RVector acc(len, 0.0);
  CVector buf(len);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t off = s * hop;
    for (std::size_t i = 0; i < len; ++i) buf[i] = (x[off + i] - mean) * win[i];
    fft::forward(buf);
    for (std::size_t i = 0; i < len; ++i) acc[i] += std::norm(buf[i]);
  }
  const double scale = dt / (win_power * static_cast<double>(segments));
  for (auto& v : acc) v *= scale;

  psd::PsdCurve c;
  c.values = fft::shift<double>(acc);
  c.freqs.resize(len);
  const double df = 1.0 / (static_cast<double>(len) * dt);
  for (std::size_t i = 0; i < len; ++i) c.freqs[i] = (static_cast<double>(i) - static_cast<double>(len / 2)) * df;
  c.lines.push_back({0.0, mean * mean});
  return c;
}

psd::PsdCurve energy_psd(const Waveform& w, const WelchConfig& cfg) {
  RVector p(w.samples.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(w.samples[i]);
  return welch_psd(p, w.dt, cfg);
}

psd::PsdCurve intensity_spectrum(const Waveform& w, double a0, const WelchConfig& cfg) {
  auto c = energy_psd(w, cfg);
  const double s = std::pow(std::abs(a0), 4);
  for (auto& v : c.values) v *= s;
  for (auto& l : c.lines) l.weight *= s;
  return c;
}

std::size_t default_segment(const pulse::PulseSpec& spec, const pulse::FiberDispersion& fiber, int block_length) {
  const auto by_block = next_power_of_two(static_cast<std::size_t>(16 * block_length * spec.samples_per_symbol));
  return std::max(by_block, pulse::analysis_grid_size(spec, fiber, block_length));
}

ScenarioResult run_psd_scenario(const ScenarioSpec& spec) {
  ScenarioResult r;
  r.name = spec.name;
  const auto source = shaping::make_source(spec.source, spec.n_symbols, spec.seed);
  r.stats = shaping::block_stats(source.stream, source.constellation);
  r.information_rate = source.information_rate;

  const std::size_t seg =
      spec.segment_len ? spec.segment_len : default_segment(spec.pulse, spec.fiber, spec.source.block_length);
  const auto model = psd::build_pulse_model(spec.pulse, spec.fiber, spec.source.block_length, seg);
  r.grid = seg;
  r.truncation = model.beats.truncation;
  r.tail_db = model.beats.tail_db;
  r.analytic_1d = psd::psd_shaped_1d(r.stats, model.beats, model.envelope);
  r.analytic_2d = psd::psd_shaped_2d(r.stats, model.beats, model.envelope);
  r.decomposition = psd::decompose(r.stats, model.beats, model.envelope);

  const auto w = synthesize(source.stream, source.constellation, spec.pulse, spec.fiber, spec.seed);
  WelchConfig cfg;
  cfg.segment_len = seg;
  r.mc = energy_psd(w, cfg);

  design::DipModelInputs in;
  in.n_s = spec.source.block_length;
  in.a = pulse::main_lobe_ratio(spec.pulse.shape, spec.pulse.rolloff);
  in.symbol_rate = 1.0 / spec.pulse.symbol_period;
  in.kappa_beta = 1.0 + spec.pulse.rolloff;
  in.dispersion = spec.fiber.dispersion_ps_nm_km * kPsPerNmKm;
  in.length = spec.fiber.length;
  in.wavelength = spec.fiber.wavelength;
  r.fmin = 0.05 / design::dispersed_duration(in);
  r.fmax = 0.4 / spec.pulse.symbol_period;
  r.deviation_1d_db = psd::band_mean_abs_db(r.analytic_1d, r.mc, r.fmin, r.fmax, spec.pulse.symbol_period);
  r.deviation_2d_db = psd::band_mean_abs_db(r.analytic_2d, r.mc, r.fmin, r.fmax, spec.pulse.symbol_period);
  return r;
}

}  // namespace ifspec::mc
