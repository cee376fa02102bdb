#pragma once

#include <optional>
#include <string>

#include "ifspec/block_stream.hpp"
#include "ifspec/psd_model.hpp"
#include "ifspec/pulsefield.hpp"

namespace ifspec::mc {

struct Waveform {
  CVector samples;  // one period of a cyclic waveform
  double dt = 1.0;
  double symbol_rate = 1.0;
  int samples_per_symbol = 8;
  std::uint64_t seed = 0;
  std::string meta;

  double energy() const;
};

/// sum_k a_k s(t - kT) with s the (optionally dispersed) pulse, built as a
/// circular convolution so the waveform is one period of a stationary signal.
Waveform synthesize(const shaping::ShapedBlockStream& stream, const shaping::Constellation& c,
                    const pulse::PulseSpec& spec, const std::optional<pulse::FiberDispersion>& fiber,
                    std::uint64_t seed);

enum class Window { Hann };

struct WelchConfig {
  std::size_t segment_len = 4096;
  double overlap = 0.5;
  Window window = Window::Hann;
};

void validate(const WelchConfig& cfg);

/// Welch averaged periodogram of a real signal, two-sided, ascending grid,
/// density units (per Hz). The sample mean is removed first and returned
/// as a DC line of weight mean^2.
psd::PsdCurve welch_psd(const RVector& x, double dt, const WelchConfig& cfg);

/// Welch PSD of |w(t)|^2.
psd::PsdCurve energy_psd(const Waveform& w, const WelchConfig& cfg);

/// |A0|^4 times the energy PSD.
psd::PsdCurve intensity_spectrum(const Waveform& w, double a0, const WelchConfig& cfg);

/// Default segment length: a power of two of at least 16 n_s sps samples
/// that also holds the dispersed pulse and block envelope.
std::size_t default_segment(const pulse::PulseSpec& spec, const pulse::FiberDispersion& fiber, int block_length);

struct ScenarioSpec {
  std::string name;
  shaping::SourceSpec source;
  pulse::PulseSpec pulse;
  pulse::FiberDispersion fiber;
  std::size_t n_symbols = 1u << 17;
  std::uint64_t seed = 1;
  std::size_t segment_len = 0;  // 0 = default_segment
};

struct ScenarioResult {
  std::string name;
  shaping::BlockStats stats;
  double information_rate = 0.0;
  psd::PsdCurve mc;
  psd::PsdCurve analytic_1d;
  psd::PsdCurve analytic_2d;
  psd::PsdDecomposition decomposition;
  double fmin = 0.0;  // comparison band, Hz
  double fmax = 0.0;
  double deviation_1d_db = 0.0;  // band-mean |analytic - Welch|
  double deviation_2d_db = 0.0;
  int truncation = 0;
  double tail_db = 0.0;
  std::size_t grid = 0;
};

/// Analytic model and Monte-Carlo estimate of one scenario on a shared grid.
/// The band is [0.05 / T_b', 0.4 / T].
ScenarioResult run_psd_scenario(const ScenarioSpec& spec);

}  // namespace ifspec::mc
