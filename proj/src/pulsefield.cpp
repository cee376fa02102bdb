#include "ifspec/pulsefield.hpp"

#include <algorithm>
#include <cmath>

#include "ifspec/fft.hpp"

namespace ifspec::pulse {

std::string to_string(PulseShape s) {
  switch (s) {
    case PulseShape::Rect: return "rect";
    case PulseShape::RaisedCosine: return "rc";
    case PulseShape::RootRaisedCosine: return "rrc";
  }
  return "?";
}

PulseShape parse_pulse_shape(const std::string& s) {
  if (s == "rect") return PulseShape::Rect;
  if (s == "rc") return PulseShape::RaisedCosine;
  if (s == "rrc") return PulseShape::RootRaisedCosine;
  throw ConfigError("unknown pulse shape '" + s + "' (expected rect, rc or rrc)");
}

double PulseField::energy() const {
  double e = 0.0;
  for (const auto& v : samples) e += std::norm(v);
  return e * dt;
}

double FiberDispersion::beta2() const {
  return -dispersion_ps_nm_km * kPsPerNmKm * wavelength * wavelength / (2.0 * kPi * kSpeedOfLight);
}

namespace {

double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x); }

double rrc(double beta, double x) {
  // x = t / T
  if (std::abs(x) < 1e-12) return 1.0 - beta + 4.0 * beta / kPi;
  if (beta > 0.0 && std::abs(std::abs(x) - 1.0 / (4.0 * beta)) < 1e-9) {
    const double arg = kPi / (4.0 * beta);
    return beta / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(arg) + (1.0 - 2.0 / kPi) * std::cos(arg));
  }
  const double num = std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
  const double den = kPi * x * (1.0 - 16.0 * beta * beta * x * x);
  return num / den;
}

double rc(double beta, double x) {
  if (beta > 0.0 && std::abs(std::abs(x) - 1.0 / (2.0 * beta)) < 1e-9) return kPi / 4.0 * sinc(1.0 / (2.0 * beta));
  return sinc(x) * std::cos(kPi * beta * x) / (1.0 - 4.0 * beta * beta * x * x);
}

void check_spec(const PulseSpec& spec) {
  if (spec.samples_per_symbol < 4) throw ConfigError("pulse needs at least 4 samples per symbol");
  if (!(spec.symbol_period > 0.0)) throw ConfigError("symbol period must be positive");
  if (spec.rolloff < 0.0 || spec.rolloff > 1.0) throw ConfigError("roll-off must lie in [0, 1]");
  if (spec.shape != PulseShape::Rect && spec.span_symbols < 1) throw ConfigError("span must be at least one symbol");
  if (spec.shape == PulseShape::Rect && spec.samples_per_symbol % 2 != 0)
    throw ConfigError("rect pulse needs an even number of samples per symbol");
}

}  // namespace

double pulse_value(PulseShape shape, double rolloff, double symbol_period, double t) {
  const double x = t / symbol_period;
  switch (shape) {
    case PulseShape::Rect: return (x >= -0.5 && x < 0.5) ? 1.0 : 0.0;
    case PulseShape::RaisedCosine: return rc(rolloff, x);
    case PulseShape::RootRaisedCosine: return rrc(rolloff, x);
  }
  return 0.0;
}

double tail_energy_fraction(const PulseSpec& spec) {
  if (spec.shape == PulseShape::Rect) return 0.0;
  // Dense Riemann sums; the pulses decay at least as 1/t^2, so 64x the
  // span captures the outer energy to far better than the 1e-6 budget.
  const int per_symbol = 16;
  const double step = 1.0 / per_symbol;
  const long long inner = static_cast<long long>(spec.span_symbols) * per_symbol;
  const long long outer = std::max<long long>(64LL * spec.span_symbols, 4096) * per_symbol;
  double e_in = 0.0, e_out = 0.0;
  for (long long k = -outer; k <= outer; ++k) {
    const double v = pulse_value(spec.shape, spec.rolloff, 1.0, static_cast<double>(k) * step);
    (std::llabs(k) <= inner ? e_in : e_out) += v * v;
  }
  return e_out / (e_in + e_out);
}

int min_span_symbols(PulseShape shape, double rolloff, double max_tail) {
  if (shape == PulseShape::Rect) return 1;
  PulseSpec s;
  s.shape = shape;
  s.rolloff = rolloff;
  for (int span = 4; span <= 4096; span += 4) {
    s.span_symbols = span;
    if (tail_energy_fraction(s) < max_tail) return span;
  }
  throw GridError("no practical truncation meets the tail-energy target");
}

PulseField make_pulse(const PulseSpec& spec) {
  check_spec(spec);
  PulseField f;
  f.dt = spec.symbol_period / spec.samples_per_symbol;
  if (spec.shape == PulseShape::Rect) {
    const int n = spec.samples_per_symbol;
    f.t0 = -0.5 * spec.symbol_period;
    f.samples.assign(static_cast<std::size_t>(n), cplx(1.0 / std::sqrt(spec.symbol_period), 0.0));
    return f;
  }
  const double tail = tail_energy_fraction(spec);
  if (tail >= 1e-6)
    throw GridError("span of " + std::to_string(spec.span_symbols) + " symbols leaves tail energy " +
                    std::to_string(tail) + " for roll-off " + std::to_string(spec.rolloff));
  const long long half = static_cast<long long>(spec.span_symbols) * spec.samples_per_symbol;
  f.t0 = -static_cast<double>(half) * f.dt;
  f.samples.resize(static_cast<std::size_t>(2 * half + 1));
  for (long long k = -half; k <= half; ++k)
    f.samples[static_cast<std::size_t>(k + half)] =
        pulse_value(spec.shape, spec.rolloff, spec.symbol_period, static_cast<double>(k) * f.dt);
  const double scale = 1.0 / std::sqrt(f.energy());
  for (auto& v : f.samples) v *= scale;
  return f;
}

double main_lobe_ratio(PulseShape shape, double rolloff) {
  switch (shape) {
    case PulseShape::Rect: return 0.5;
    case PulseShape::RaisedCosine: return 1.0;
    case PulseShape::RootRaisedCosine: {
      // First sign change of the closed form, refined by bisection.
      const double step = 1e-3;
      double lo = step;
      double vlo = rrc(rolloff, lo);
      for (double x = 2 * step; x < 4.0; x += step) {
        const double v = rrc(rolloff, x);
        if ((v > 0) != (vlo > 0)) {
          double a = lo, b = x;
          for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (a + b);
            ((rrc(rolloff, mid) > 0) == (vlo > 0) ? a : b) = mid;
          }
          return 0.5 * (a + b);
        }
        lo = x;
        vlo = v;
      }
      throw ModelError("RRC pulse has no main-lobe null below 4T");
    }
  }
  return 1.0;
}

PulseField embed(const PulseField& field, std::size_t n) {
  if (n < field.size()) throw GridError("embedding grid smaller than the pulse");
  PulseField out;
  out.dt = field.dt;
  out.samples.assign(n, cplx{});
  const std::size_t offset = (n - field.size()) / 2;
  std::copy(field.samples.begin(), field.samples.end(), out.samples.begin() + static_cast<std::ptrdiff_t>(offset));
  out.t0 = field.t0 - static_cast<double>(offset) * field.dt;
  return out;
}

CVector dispersion_kernel(std::size_t n, double dt, double beta2, double length) {
  CVector k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 2.0 * kPi * fft::bin_frequency(i, n, dt);
    k[i] = std::polar(1.0, 0.5 * beta2 * w * w * length);
  }
  return k;
}

double guard_energy_fraction(const PulseField& field) {
  const std::size_t n = field.size();
  const std::size_t guard = n / 16;
  double e_guard = 0.0, e_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::norm(field.samples[i]);
    e_total += e;
    if (i < guard || i >= n - guard) e_guard += e;
  }
  return e_total > 0.0 ? e_guard / e_total : 0.0;
}

double phase_increment_at_edge(std::size_t n, double dt, double beta2, double length) {
  const double f_edge = 0.5 / dt;
  const double df = 1.0 / (static_cast<double>(n) * dt);
  return std::abs(beta2) * length * (2.0 * kPi * f_edge) * (2.0 * kPi * df);
}

std::size_t analysis_grid_size(const PulseSpec& spec, const FiberDispersion& fiber, int extra_symbols,
                               std::size_t min_size) {
  const double T = spec.symbol_period;
  const double band = (1.0 + spec.rolloff) / T;  // two-sided occupied width (rect: main lobes)
  const double spread = 2.0 * kPi * fiber.abs_beta2() * fiber.length * band;
  const double span = spec.shape == PulseShape::Rect ? 1.0 : 2.0 * spec.span_symbols;
  const double support_symbols = span + spread / T + extra_symbols;
  // Occupied part must stay out of both 1/16 guards with some margin.
  const auto needed = static_cast<std::size_t>(std::ceil(1.5 * support_symbols * spec.samples_per_symbol));
  std::size_t n = std::max(min_size, next_power_of_two(needed));
  const double dt = T / spec.samples_per_symbol;
  while (phase_increment_at_edge(n, dt, fiber.beta2(), fiber.length) >= kPi) n *= 2;
  return n;
}

PulseField disperse(const PulseField& field, const FiberDispersion& fiber) {
  if (fiber.length < 0.0) throw ConfigError("fiber length must be nonnegative");
  if (fiber.length == 0.0) return field;
  PulseField out = field;
  fft::forward(out.samples);
  const std::size_t n = out.size();
  const double beta2 = fiber.beta2();
  if (phase_increment_at_edge(n, field.dt, beta2, fiber.length) >= kPi)
    throw GridError("grid too short for the dispersion kernel (phase aliasing)");
  const auto kernel = dispersion_kernel(n, field.dt, beta2, fiber.length);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] *= kernel[i];
  fft::inverse(out.samples);
  if (guard_energy_fraction(out) >= 1e-6) throw GridError("dispersed pulse reaches the grid edge; enlarge the grid");
  return out;
}

CVector shift_samples(std::span<const cplx> x, long long samples, double max_loss) {
  const auto n = static_cast<long long>(x.size());
  CVector out(x.size(), cplx{});
  double lost = 0.0, total = 0.0;
  for (long long i = 0; i < n; ++i) {
    const double e = std::norm(x[static_cast<std::size_t>(i)]);
    total += e;
    const long long j = i + samples;
    if (j >= 0 && j < n)
      out[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(i)];
    else
      lost += e;
  }
  if (total > 0.0 && lost > max_loss * total) throw GridError("shift pushes the pulse off the grid");
  return out;
}

namespace {

CVector spectrum_of(std::span<const cplx> samples, double dt, double t0) {
  CVector spec(samples.begin(), samples.end());
  fft::forward(spec);
  const std::size_t n = spec.size();
  for (std::size_t i = 0; i < n; ++i)
    spec[i] *= dt * std::polar(1.0, -2.0 * kPi * fft::bin_frequency(i, n, dt) * t0);
  return spec;
}

}  // namespace

CVector beat_spectrum(const PulseField& field, int m, int samples_per_symbol) {
  const long long shift = static_cast<long long>(m) * samples_per_symbol;
  if (std::llabs(shift) >= static_cast<long long>(field.size())) throw GridError("beat shift exceeds the grid");
  CVector g(field.size());
  for (long long i = 0; i < static_cast<long long>(field.size()); ++i) {
    const long long j = i - shift;
    g[static_cast<std::size_t>(i)] = (j >= 0 && j < static_cast<long long>(field.size()))
                                         ? field.samples[static_cast<std::size_t>(i)] *
                                               std::conj(field.samples[static_cast<std::size_t>(j)])
                                         : cplx{};
  }
  return spectrum_of(g, field.dt, field.t0);
}

BlockEnvelope block_envelope(const PulseField& field, int n_s, int samples_per_symbol) {
  if (n_s < 1) throw ConfigError("block length must be at least 1");
  const std::size_t n = field.size();
  CVector power(n);
  for (std::size_t i = 0; i < n; ++i) power[i] = std::norm(field.samples[i]);
  RVector sum(n, 0.0);
  for (int i = 1; i <= n_s; ++i) {
    const auto shifted = shift_samples(power, static_cast<long long>(i) * samples_per_symbol, 1e-9);
    for (std::size_t k = 0; k < n; ++k) sum[k] += shifted[k].real();
  }
  double e_sum = 0.0, e_pulse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    e_sum += sum[k];
    e_pulse += power[k].real();
  }
  BlockEnvelope b;
  b.n_norm = e_sum / e_pulse;
  b.envelope.dt = field.dt;
  b.envelope.t0 = field.t0;
  b.envelope.samples.resize(n);
  CVector u2(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = sum[k] / b.n_norm;
    b.envelope.samples[k] = std::sqrt(v);
    u2[k] = v;
  }
  b.spectrum = spectrum_of(u2, field.dt, field.t0);
  return b;
}

}  // namespace ifspec::pulse
