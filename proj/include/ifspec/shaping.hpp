#pragma once

#include <span>

#include "ifspec/common.hpp"

namespace ifspec::shaping {

/// A complex symbol alphabet with per-point probabilities.
///
/// Square QAM alphabets built by build_constellation() order their points as
/// index = level_i * side + level_q, where level l maps to the odd integer
/// 2l - side + 1 before scaling. Alphabets made with from_points() carry no
/// layout and may be unnormalized (e.g. a bare amplitude alphabet {1, 3}).
struct Constellation {
  std::vector<cplx> points;
  RVector probs;
  int order = 0;

  double mean_energy() const;
  double energy_variance() const;
  double entropy_bits() const;
  /// Copy with points scaled so the mean energy under probs is one.
  Constellation normalized() const;
  /// Copy with the same points and different probabilities.
  Constellation with_probs(RVector p) const;
};

enum class Normalization { UnitMeanEnergy, None };

/// Square M-QAM on the odd-integer grid with uniform probabilities.
/// Supported orders: 4, 16, 64, 256.
Constellation build_constellation(int order, Normalization norm = Normalization::UnitMeanEnergy);

/// Arbitrary alphabet; probs must be nonnegative and sum to one.
Constellation from_points(std::vector<cplx> points, RVector probs);

double entropy_bits(std::span<const double> probs);

struct MbParams {
  double lambda = 0.0;       // p_i proportional to exp(-lambda |a_i|^2)
  double target_rate = 0.0;  // bits/symbol (entropy of the whole 2D symbol)
};

struct MbFit {
  MbParams params;
  Constellation constellation;  // shaped probabilities, renormalized to unit mean energy
};

RVector mb_probabilities(const Constellation& c, double lambda);

/// Maxwell-Boltzmann distribution on `c` whose entropy equals target_rate.
/// Feasible rates lie in (log2(#minimum-energy points), log2(M)].
MbFit fit_mb(const Constellation& c, double target_rate);

/// Per-dimension view of a square QAM alphabet, as used by amplitude shaping
/// with uniform sign bits.
struct PasLayout {
  int side = 0;                 // sqrt(M)
  std::vector<int> amplitudes;  // 1, 3, ..., side - 1 (unscaled)

  /// Grid level in [0, side) for amplitude index j and sign.
  int level(int amplitude_index, bool negative) const;
  int point_index(int level_i, int level_q) const { return level_i * side + level_q; }
  /// P(|I| = amplitudes[j]) under the constellation's probabilities.
  RVector amplitude_marginal(const Constellation& c) const;
};

PasLayout pas_layout(const Constellation& c);

/// True when probs factor as p(I) p(Q) on a square layout (within tol).
bool is_product_form(const Constellation& c, double tol = 1e-12);

}  // namespace ifspec::shaping
