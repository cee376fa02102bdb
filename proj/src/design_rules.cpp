#include "ifspec/design_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ifspec::design {

void validate(const DipModelInputs& in) {
  if (in.n_s < 1) throw ConfigError("block length must be at least 1");
  if (!(in.a > 0.0)) throw ConfigError("main-lobe ratio a must be positive");
  if (!(in.symbol_rate > 0.0)) throw ConfigError("symbol rate must be positive");
  if (!(in.kappa_beta >= 1.0)) throw ConfigError("kappa_beta must be at least 1");
  if (!(in.dispersion > 0.0)) throw ConfigError("dispersion must be positive");
  if (in.length < 0.0) throw ConfigError("length must be nonnegative");
  if (!(in.wavelength > 0.0)) throw ConfigError("wavelength must be positive");
}

double block_duration(const DipModelInputs& in) {
  validate(in);
  return (in.n_s - 1 + 2.0 * in.a) / in.symbol_rate;
}

double dispersive_broadening(const DipModelInputs& in) {
  validate(in);
  return in.kappa_beta * in.dispersion * in.length * in.symbol_rate * in.wavelength * in.wavelength / kSpeedOfLight;
}

double dispersed_duration(const DipModelInputs& in) { return block_duration(in) + dispersive_broadening(in); }

double dip_width(const DipModelInputs& in) { return 2.0 / dispersed_duration(in); }

namespace {

double rate_for(double overlap, const DipModelInputs& in) {
  validate(in);
  if (in.length == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(overlap * kSpeedOfLight /
                   (in.kappa_beta * in.dispersion * in.length * in.wavelength * in.wavelength));
}

}  // namespace

double opt_rate_shaped(const DipModelInputs& in) { return rate_for(in.n_s - 1 + 2.0 * in.a, in); }

double opt_rate_unshaped(const DipModelInputs& in) { return rate_for(2.0 * in.a, in); }

std::string to_string(PresetName p) {
  switch (p) {
    case PresetName::ThisWorkShaped: return "this_work_shaped";
    case PresetName::ThisWorkUnshaped: return "this_work_unshaped";
    case PresetName::Poggiolini: return "poggiolini";
    case PresetName::Wang: return "wang";
  }
  return "?";
}

PresetName parse_preset(const std::string& s) {
  for (auto p : {PresetName::ThisWorkShaped, PresetName::ThisWorkUnshaped, PresetName::Poggiolini, PresetName::Wang})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown rate preset '" + s + "'");
}

RatePreset make_preset(PresetName name, const DipModelInputs& in, std::optional<double> spacing_ratio) {
  RatePreset p;
  p.name = name;
  switch (name) {
    case PresetName::ThisWorkShaped:
      p.overlap = in.n_s - 1 + 2.0 * in.a;
      p.nu = in.kappa_beta;
      break;
    case PresetName::ThisWorkUnshaped:
      p.overlap = 2.0 * in.a;
      p.nu = in.kappa_beta;
      break;
    case PresetName::Poggiolini:
      if (!spacing_ratio) throw ConfigError("poggiolini preset needs the channel spacing ratio delta f / R");
      p.overlap = 4.0;
      p.nu = 2.0 * *spacing_ratio - 1.0;
      break;
    case PresetName::Wang:
      if (!spacing_ratio) throw ConfigError("wang preset needs the channel spacing ratio delta f / R");
      p.overlap = 1.0;
      p.nu = *spacing_ratio * *spacing_ratio;
      break;
  }
  return p;
}

double general_rate(const RatePreset& preset, const DipModelInputs& link) {
  validate(link);
  if (!(preset.nu > 0.0)) throw ConfigError("preset spacing factor nu must be positive");
  if (!(preset.overlap > 0.0)) throw ConfigError("preset overlap factor must be positive");
  if (link.length == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(preset.overlap / (2.0 * kPi * link.abs_beta2() * link.length * preset.nu));
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  if (!(hi > lo)) throw ConfigError("golden-section bracket is empty");
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 500 && (b - a) > rel_tol * std::abs(0.5 * (a + b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double numeric_opt_rate(const DipModelInputs& in, double lo, double hi) {
  auto width_at_log_rate = [in](double log_rate) {
    DipModelInputs x = in;
    x.symbol_rate = std::exp(log_rate);
    return dip_width(x);
  };
  return std::exp(golden_section_max(width_at_log_rate, std::log(lo), std::log(hi), 1e-13));
}

DipMeasurement measure_dip_width(const RVector& freqs, const RVector& values, double symbol_period) {
  if (freqs.size() != values.size() || freqs.size() < 8) throw ModelError("dip measurement needs a populated grid");
  RVector band;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const double f = std::abs(freqs[i]);
    if (f >= 0.1 / symbol_period && f <= 0.3 / symbol_period) band.push_back(values[i]);
  }
  if (band.empty()) throw ModelError("plateau band holds no bins");
  std::sort(band.begin(), band.end());
  const std::size_t h = band.size() / 2;
  DipMeasurement m;
  m.plateau = band.size() % 2 ? band[h] : 0.5 * (band[h - 1] + band[h]);
  const double level = 0.5 * m.plateau;

  const auto dc = static_cast<std::size_t>(std::lower_bound(freqs.begin(), freqs.end(), 0.0) - freqs.begin());
  if (dc >= freqs.size() || freqs[dc] != 0.0) throw ModelError("grid has no DC bin");
  if (values[dc] >= level) return m;  // no dip at all

  auto crossing = [&](int dir) {
    for (std::size_t i = dc;;) {
      const std::size_t j = dir > 0 ? i + 1 : i - 1;
      if ((dir > 0 && j >= freqs.size()) || (dir < 0 && i == 0)) throw ModelError("PSD never rises to the -3 dB level");
      if (values[j] >= level) {
        const double t = (level - values[i]) / (values[j] - values[i]);
        return freqs[i] + t * (freqs[j] - freqs[i]);
      }
      i = j;
    }
  };
  m.right = crossing(+1);
  m.left = crossing(-1);
  m.width = m.right - m.left;
  return m;
}

}  // namespace ifspec::design
