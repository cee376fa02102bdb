#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ifspec/block_stream.hpp"
#include "ifspec/mc_engine.hpp"
#include "ifspec/psd_model.hpp"

namespace ifspec::xpm {

struct LinkSpec {
  double span_length = 80e3;       // m
  int n_spans = 10;
  double dispersion_ps_nm_km = 16.0;
  double n2 = 2.6e-20;             // m^2/W
  double a_eff = 80e-12;           // m^2
  double alpha_db_km = 0.2;
  double wavelength = 1550e-9;     // m
  bool amplifiers = true;          // ideal gain restoring launch power after each span

  double gamma() const;            // 1/(W m)
  double beta2() const;            // s^2/m
  double alpha() const;            // 1/m (power)
};

void validate(const LinkSpec& link);

struct ChannelPlan {
  double pump_power = 1e-3;    // W
  double probe_power = 10e-6;  // W
  double spacing = 50e9;       // Hz
  double symbol_rate = 32e9;   // Bd
  double rolloff = 0.05;
  shaping::SourceSpec pump_source{64, shaping::ShapingMethod::Iid, 0.0, 1};
  std::size_t n_symbols = 1u << 15;
  int samples_per_symbol = 0;  // 0 = smallest power of two covering the band
};

void validate(const ChannelPlan& plan);

/// Samples per symbol: smallest power of two with sps R_s >= 2 spacing + (1 + beta) R_s.
int default_samples_per_symbol(const ChannelPlan& plan);

/// Default SSFM step: an eighth of the length over which the pump walks one
/// symbol off the probe, reduced to divide the span evenly.
double default_step(const ChannelPlan& plan, const LinkSpec& link);

/// Symmetric split-step propagation over link.n_spans spans. An ideal
/// amplifier (if enabled) follows each span; on_span sees the field after it.
mc::Waveform ssfm_propagate(const mc::Waveform& input, const LinkSpec& link, double step,
                            const std::function<void(int, const CVector&)>& on_span = {});

struct PhaseNoiseResult {
  RVector per_span_variance;         // rad^2, index 0 is after span 1
  std::vector<psd::PsdCurve> phase_psd;  // per span, ascending two-sided
  double step = 0.0;
  int samples_per_symbol = 0;
  std::size_t grid = 0;
  double information_rate = 0.0;
};

/// Probe phase after band selection and shift to baseband: unwrapped
/// argument with mean and linear trend removed.
RVector extract_probe_phase(const CVector& field, double dt, double probe_offset, double bandwidth);

/// Pump (shaped QAM at -spacing/2) and CW probe (+spacing/2) on one grid.
/// step = 0 uses default_step.
PhaseNoiseResult run_pump_probe(const ChannelPlan& plan, const LinkSpec& link, std::uint64_t seed, double step = 0.0);

/// Runs with the default step and halves it until the per-span variances
/// change by less than rel_tol; returns the finer run. Throws
/// ConvergenceError after max_halvings.
PhaseNoiseResult run_converged(const ChannelPlan& plan, const LinkSpec& link, std::uint64_t seed,
                               double rel_tol = 0.02, int max_halvings = 3);

/// Largest relative change between two per-span variance lists; values
/// both below `floor` count as equal.
double max_relative_change(const RVector& a, const RVector& b, double floor = 1e-20);

struct RateSweep {
  RVector rates;
  std::vector<int> spans;
  std::vector<RVector> variance;  // [rate][span index]
  std::vector<double> best_rate;  // per entry of spans
};

/// Variance surface over symbol rates; each rate is propagated once to the
/// largest requested span count.
RateSweep sweep_symbol_rate(const ChannelPlan& plan, const RVector& rates, LinkSpec link, const std::vector<int>& spans,
                            std::uint64_t seed, bool converge = true);

}  // namespace ifspec::xpm
