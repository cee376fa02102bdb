#pragma once

#include <span>
#include <string>

#include "ifspec/common.hpp"

namespace ifspec::pulse {

enum class PulseShape { Rect, RaisedCosine, RootRaisedCosine };

std::string to_string(PulseShape s);
PulseShape parse_pulse_shape(const std::string& s);

struct PulseSpec {
  PulseShape shape = PulseShape::RootRaisedCosine;
  double rolloff = 0.1;
  double symbol_period = 1.0 / 32e9;  // s
  int samples_per_symbol = 8;
  int span_symbols = 64;  // truncation half-length in symbols
};

/// Sampled complex field; sample i sits at t0 + i * dt.
struct PulseField {
  CVector samples;
  double dt = 1.0;
  double t0 = 0.0;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double energy() const;
};

struct FiberDispersion {
  double dispersion_ps_nm_km = 16.0;
  double wavelength = 1550e-9;  // m
  double length = 0.0;          // m

  /// beta2 = -D lambda^2 / (2 pi c), s^2/m.
  double beta2() const;
  double abs_beta2() const { return std::abs(beta2()); }
};

/// Continuous-time pulse value at t (unnormalized: peak-style closed form).
double pulse_value(PulseShape shape, double rolloff, double symbol_period, double t);

/// Fraction of the pulse energy outside +-span_symbols * T.
double tail_energy_fraction(const PulseSpec& spec);

/// Smallest truncation half-length (symbols) keeping the tail below max_tail.
int min_span_symbols(PulseShape shape, double rolloff, double max_tail = 1e-6);

/// Unit-energy sampled pulse on [-span T, span T] (rect: one symbol slot).
/// Throws GridError when the truncated tail exceeds 1e-6 of the energy.
PulseField make_pulse(const PulseSpec& spec);

/// t_z R_s: main-lobe half-width over the symbol period (first null).
double main_lobe_ratio(PulseShape shape, double rolloff);

/// Copy of `field` centred on a zero-padded grid of n samples.
PulseField embed(const PulseField& field, std::size_t n);

/// exp(j beta2 omega^2 L / 2) on the FFT-natural frequency grid.
CVector dispersion_kernel(std::size_t n, double dt, double beta2, double length);

/// |beta2| L omega_edge delta_omega: kernel phase step between the last two
/// bins below Nyquist. Must stay below pi.
double phase_increment_at_edge(std::size_t n, double dt, double beta2, double length);

/// Energy fraction in the outer guard bands (first and last n/16 samples).
double guard_energy_fraction(const PulseField& field);

/// Grid size (power of two) that holds a pulse of `spec` after `fiber`
/// plus `extra_symbols` of shifts, with empty guard bands.
std::size_t analysis_grid_size(const PulseSpec& spec, const FiberDispersion& fiber, int extra_symbols = 0,
                               std::size_t min_size = 1024);

/// Chromatic dispersion applied in the frequency domain. L = 0 returns the
/// input unchanged. Throws GridError when the grid is too short for the
/// dispersed pulse (guard-band energy or phase-increment aliasing rule).
PulseField disperse(const PulseField& field, const FiberDispersion& fiber);

/// Fourier transform of s(t) s*(t - m T) on the field's grid, FFT-natural
/// order, continuous-time scaling (multiplied by dt).
CVector beat_spectrum(const PulseField& field, int m, int samples_per_symbol);

struct BlockEnvelope {
  PulseField envelope;  // u(t), real and nonnegative
  CVector spectrum;     // Fourier transform of |u|^2, FFT-natural order
  double n_norm = 1.0;
};

/// u(t) = sqrt(sum_{i=1..n_s} |s(t - iT)|^2 / n_norm) with n_norm chosen so
/// u has the energy of s.
BlockEnvelope block_envelope(const PulseField& field, int n_s, int samples_per_symbol);

/// Shift by `samples` (positive = later in time) with zero fill; throws
/// GridError when more than `max_loss` of the energy falls off the grid.
CVector shift_samples(std::span<const cplx> x, long long samples, double max_loss = 1e-9);

}  // namespace ifspec::pulse
