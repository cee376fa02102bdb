#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ifspec/common.hpp"

namespace ifspec::design {

struct DipModelInputs {
  int n_s = 1;
  double a = 1.0;            // t_z R_s
  double symbol_rate = 32e9;  // R_s, Bd
  double kappa_beta = 1.1;    // 1 + roll-off
  double dispersion = 16.0 * kPsPerNmKm;  // D, s/m^2
  double length = 0.0;        // m
  double wavelength = 1550e-9;  // m

  double t_z() const { return a / symbol_rate; }
  /// |beta2| = D lambda^2 / (2 pi c)
  double abs_beta2() const { return dispersion * wavelength * wavelength / (2.0 * kPi * kSpeedOfLight); }
};

/// Validates ranges; throws ConfigError.
void validate(const DipModelInputs& in);

/// T_b = (n_s - 1 + 2a) / R_s
double block_duration(const DipModelInputs& in);
/// T_b' = T_b + kappa D L R_s lambda^2 / c
double dispersed_duration(const DipModelInputs& in);
/// Second term of T_b' alone.
double dispersive_broadening(const DipModelInputs& in);
/// Delta f_b = 2 / T_b'
double dip_width(const DipModelInputs& in);

/// sqrt((n_s - 1 + 2a) c / (kappa D L lambda^2)); +inf when L = 0.
double opt_rate_shaped(const DipModelInputs& in);
/// sqrt(2a c / (kappa D L lambda^2)); +inf when L = 0.
double opt_rate_unshaped(const DipModelInputs& in);

enum class PresetName { ThisWorkShaped, ThisWorkUnshaped, Poggiolini, Wang };

std::string to_string(PresetName p);
PresetName parse_preset(const std::string& s);

struct RatePreset {
  PresetName name = PresetName::ThisWorkUnshaped;
  double overlap = 1.0;  // OL
  double nu = 1.0;
};

/// Preset factors for a link. spacing_ratio (delta f / R) is required by
/// the poggiolini and wang presets and ignored otherwise.
RatePreset make_preset(PresetName name, const DipModelInputs& in, std::optional<double> spacing_ratio = std::nullopt);

/// R_g = sqrt(OL / (2 pi |beta2| L nu))
double general_rate(const RatePreset& preset, const DipModelInputs& link);

/// Golden-section maximizer of a unimodal f on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-10);

/// Symbol rate maximizing dip_width, searched on [lo, hi] in log-rate.
double numeric_opt_rate(const DipModelInputs& in, double lo = 1e8, double hi = 1e13);

struct DipMeasurement {
  double width = 0.0;    // Hz
  double left = 0.0;     // Hz, negative side crossing
  double right = 0.0;    // Hz, positive side crossing
  double plateau = 0.0;  // median over [0.1/T, 0.3/T]
};

/// -3 dB-of-plateau width of a continuous PSD around f = 0 on an ascending
/// two-sided grid. Throws ModelError when no crossing is found.
DipMeasurement measure_dip_width(const RVector& freqs, const RVector& values, double symbol_period);

}  // namespace ifspec::design
