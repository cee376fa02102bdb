#pragma once

#include <optional>
#include <vector>

#include "ifspec/block_stream.hpp"
#include "ifspec/pulsefield.hpp"

namespace ifspec::psd {

/// Which fiber state a set of spectra was computed for.
struct DispersionState {
  double beta2 = 0.0;
  double length = 0.0;
  bool operator==(const DispersionState&) const = default;
};

struct SpectralLine {
  double frequency = 0.0;  // Hz, a multiple of 1/T
  double weight = 0.0;     // coefficient of delta(f - frequency)
};

/// Two-sided PSD on an ascending frequency grid, lines kept apart.
struct PsdCurve {
  RVector freqs;
  RVector values;
  std::vector<SpectralLine> lines;

  double df() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
  std::size_t size() const { return freqs.size(); }
};

/// |G(f, mT)|^2 terms of one (pulse, fiber) state on an N-point grid.
struct BeatSpectra {
  pulse::PulseSpec pulse;
  DispersionState state;
  std::size_t grid = 0;
  double dt = 0.0;
  RVector freqs;     // ascending
  RVector g0;        // |G(f,0)|^2
  RVector neighbor;  // sum over 0 < |m| <= M of |G(f, mT)|^2
  std::vector<SpectralLine> unit_lines;  // |G(l/T, 0)|^2 at each l/T
  int truncation = 0;                    // M
  double tail_db = 0.0;                  // change of the neighbor sum when M is doubled
};

/// |H(f,0)|^2 of the block envelope for the same state.
struct EnvelopeSpectrum {
  DispersionState state;
  int block_length = 1;
  double n_norm = 1.0;
  RVector h0;  // ascending
};

struct PulseModel {
  pulse::PulseField field;  // dispersed pulse on the analysis grid
  BeatSpectra beats;
  EnvelopeSpectrum envelope;
};

/// Default neighbor-sum truncation: dispersed duration in symbols plus the span.
int default_truncation(const pulse::PulseSpec& spec, const pulse::FiberDispersion& fiber);

/// Beat spectra of an already dispersed pulse. truncation < 0 picks the
/// default and doubles it until the omitted tail is below 0.1 dB.
BeatSpectra compute_beats(const pulse::PulseField& dispersed, const pulse::PulseSpec& spec, DispersionState state,
                          int truncation = -1);

EnvelopeSpectrum compute_envelope(const pulse::PulseField& dispersed, const pulse::PulseSpec& spec,
                                  DispersionState state, int block_length);

/// Builds pulse, grid, dispersion, beats and envelope. grid = 0 sizes the
/// grid automatically; otherwise it must be a power of two that fits.
PulseModel build_pulse_model(const pulse::PulseSpec& spec, const pulse::FiberDispersion& fiber, int block_length,
                             std::size_t grid = 0);

/// Coefficient of the neighbor-beating sum: 2 mu_E^2 (real-symbol form) or
/// Psi_2D (complex-symbol form).
enum class NeighborWeight { TwoMuE2, Psi2d };

double neighbor_coefficient(const shaping::BlockStats& stats, NeighborWeight w);

PsdCurve psd_iid(const shaping::BlockStats& stats, const BeatSpectra& beats,
                 NeighborWeight weight = NeighborWeight::TwoMuE2);

/// I.i.d. PSD with neighbor coefficient 2 mu_E^2 plus the block-shaping correction.
PsdCurve psd_shaped_1d(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env);

/// As psd_shaped_1d with the neighbor coefficient Psi_2D.
PsdCurve psd_shaped_2d(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env);

struct PsdDecomposition {
  RVector freqs;
  std::vector<SpectralLine> lines;
  RVector self_beating;
  RVector shaping_correction;  // signed
  RVector neighbor_beating;
  RVector total;
  NeighborWeight weight = NeighborWeight::Psi2d;
};

PsdDecomposition decompose(const shaping::BlockStats& stats, const BeatSpectra& beats, const EnvelopeSpectrum& env,
                           NeighborWeight weight = NeighborWeight::Psi2d);

struct NegativeBin {
  double frequency = 0.0;
  double value = 0.0;
};

/// Most negative bin below -rel_tol * max|values|, if any.
std::optional<NegativeBin> find_negative(const RVector& freqs, const RVector& values, double rel_tol = 1e-9);

/// Throws ModelError naming the offending frequency.
void require_nonnegative(const PsdCurve& curve, double rel_tol = 1e-9);

/// True when f lies within `guard_bins` bins of a multiple of 1/T.
bool near_line(double f, double symbol_period, double df, int guard_bins = 2);

/// Mean of |10 log10(a/b)| over positive bins with fmin <= |f| <= fmax,
/// skipping line neighborhoods. Both curves must share the grid.
double band_mean_abs_db(const PsdCurve& a, const PsdCurve& b, double fmin, double fmax, double symbol_period);

/// Value of a curve at the bin nearest f.
double value_at(const PsdCurve& c, double f);

}  // namespace ifspec::psd
