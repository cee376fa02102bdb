#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <vector>

#include "ifspec/common.hpp"

namespace ifspec::shaping {

using BigInt = boost::multiprecision::cpp_int;
using Bits = std::vector<std::uint8_t>;

/// floor(log2(x)) for x >= 1.
int floor_log2(const BigInt& x);

/// Big-endian bit string -> nonnegative integer.
BigInt bits_to_index(std::span<const std::uint8_t> bits);

/// Nonnegative integer -> big-endian bit string of exactly n_bits.
Bits index_to_bits(const BigInt& index, int n_bits);

/// Histogram of letters in a constant-composition block.
struct Composition {
  std::vector<int> counts;
  int length() const;
};

/// n-type closest to `probs` in KL divergence D(type || probs). Ties go to
/// the lower letter index, i.e. the lower-energy amplitude level.
Composition quantize_composition(std::span<const double> probs, int n);

/// Constant-composition matcher: bit strings index the lexicographically
/// ordered permutations of a fixed multiset.
class CcdmCodec {
 public:
  explicit CcdmCodec(Composition composition);

  const Composition& composition() const { return composition_; }
  int block_length() const { return composition_.length(); }
  const BigInt& sequence_count() const { return count_; }
  int input_bits() const { return input_bits_; }

  std::vector<int> unrank(const BigInt& index) const;
  BigInt rank(std::span<const int> block) const;

  std::vector<int> encode(std::span<const std::uint8_t> bits) const;
  Bits decode(std::span<const int> block) const;

 private:
  Composition composition_;
  BigInt count_;
  int input_bits_ = 0;
};

/// Enumerative sphere shaping: bit strings index, in lexicographic order of
/// amplitude indices, every length-n amplitude sequence whose energy
/// sum(a_i^2) does not exceed e_max. Counting runs on a cumulative-energy
/// trellis over reduced energies (a^2 - a_min^2) / g.
class EssCodec {
 public:
  /// amplitudes must be positive, strictly increasing integers.
  EssCodec(std::vector<int> amplitudes, int block_length, long long e_max);

  /// Smallest energy bound whose sequence count carries at least `bits`.
  static long long min_energy_bound(const std::vector<int>& amplitudes, int block_length, int bits);

  const std::vector<int>& amplitudes() const { return amplitudes_; }
  int block_length() const { return n_; }
  long long e_max() const { return e_max_; }
  const BigInt& sequence_count() const { return table_[static_cast<std::size_t>(n_)][budget_]; }
  int input_bits() const { return input_bits_; }

  std::vector<int> unrank(BigInt index) const;
  BigInt rank(std::span<const int> block) const;

  std::vector<int> encode(std::span<const std::uint8_t> bits) const;
  Bits decode(std::span<const int> block) const;

 private:
  std::vector<int> amplitudes_;
  std::vector<long long> reduced_;  // reduced energy per amplitude
  int n_ = 0;
  long long e_max_ = 0;
  std::size_t budget_ = 0;
  // table_[r][b]: sequences of length r with reduced energy <= b.
  std::vector<std::vector<BigInt>> table_;
  int input_bits_ = 0;
};

}  // namespace ifspec::shaping
