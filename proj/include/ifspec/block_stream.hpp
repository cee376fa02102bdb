#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>

#include "ifspec/enumerative.hpp"
#include "ifspec/shaping.hpp"

namespace ifspec::shaping {

enum class ShapingMethod { Ccdm, Ess, Iid };

std::string to_string(ShapingMethod m);
ShapingMethod parse_shaping_method(const std::string& s);

/// Consecutive length-n_s blocks of symbol indices into some Constellation.
struct ShapedBlockStream {
  std::vector<int> symbols;
  int block_length = 1;
  ShapingMethod method = ShapingMethod::Iid;
  std::optional<double> e_max;  // block energy bound in the stream's energy units (ESS)

  std::size_t block_count() const { return symbols.size() / static_cast<std::size_t>(block_length); }
  std::span<const int> block(std::size_t k) const {
    return std::span<const int>(symbols).subspan(k * static_cast<std::size_t>(block_length),
                                                 static_cast<std::size_t>(block_length));
  }
};

/// Sample energy statistics of a block stream. Variances use the
/// population convention (divide by the count).
struct BlockStats {
  int block_length = 1;
  std::size_t blocks = 0;
  double mu_E = 0.0;           // mean symbol energy
  double sigma_E2 = 0.0;       // symbol-energy variance
  double mu_sigma_blk2 = 0.0;  // mean intra-block energy variance
  double sigma_mu_blk2 = 0.0;  // variance of per-block mean energies
  double c_corr = 0.0;         // (n_s - 1) sigma_mu_blk2 - mu_sigma_blk2
  double psi_2d = 0.0;         // mu_E^2 + (mu_I2 - mu_Q2)^2 + 4 mu_IQ^2
  double mu_I2 = 0.0;
  double mu_Q2 = 0.0;
  double mu_IQ = 0.0;
};

BlockStats block_stats(const ShapedBlockStream& stream, const Constellation& c);

/// Mean of (E_i - mu_E)(E_j - mu_E) over ordered in-block pairs i != j.
double pairwise_energy_covariance(const ShapedBlockStream& stream, const Constellation& c);

/// Every sequence of the codec, in index order; symbols are letter indices.
ShapedBlockStream ccdm_codebook(const CcdmCodec& codec);
ShapedBlockStream ess_codebook(const EssCodec& codec);

/// Real-valued alphabet {amplitudes} with uniform probabilities, for
/// evaluating 1D codebooks with block_stats.
Constellation amplitude_alphabet(const std::vector<int>& amplitudes);

using Rng = std::mt19937_64;

Bits random_bits(int n, Rng& rng);

/// Amplitude-shaped QAM: I and Q amplitudes come from two independent codec
/// blocks, signs are uniform bits. Symbols index into the square layout.
ShapedBlockStream ccdm_stream(const PasLayout& layout, const CcdmCodec& codec, std::size_t blocks, Rng& rng);
ShapedBlockStream ess_stream(const PasLayout& layout, const EssCodec& codec, std::size_t blocks, Rng& rng);

/// Independent draws from c.probs by inverse-CDF sampling. Product-form square
/// alphabets are sampled per dimension, so alphabets of different orders
/// driven by the same seed produce nested (strongly correlated) sequences.
ShapedBlockStream iid_stream(const Constellation& c, std::size_t n_symbols, int block_length, Rng& rng);

/// Empirical symbol frequencies of a stream over c's points.
RVector empirical_probs(const ShapedBlockStream& stream, std::size_t alphabet_size);

/// Description of a shaped QAM source.
struct SourceSpec {
  int order = 64;
  ShapingMethod method = ShapingMethod::Iid;
  double target_rate = 0.0;  // bits/symbol; 0 or log2(M) means uniform
  int block_length = 1;
};

struct ShapedSource {
  SourceSpec spec;
  Constellation constellation;  // empirical probabilities, unit mean energy
  ShapedBlockStream stream;
  MbParams mb;                          // MB fit behind the target distribution
  std::optional<Composition> composition;  // CCDM, per dimension
  std::optional<long long> ess_bound;      // ESS per-dimension bound, unscaled odd-integer units
  int amplitude_bits = 0;                  // codec input bits per dimension and block
  double information_rate = 0.0;          // bits/symbol actually carried
};

/// Builds the alphabet, codec and a stream of at least n_symbols symbols
/// (rounded up to whole blocks), then rescales the constellation so the
/// stream's empirical mean energy is one.
ShapedSource make_source(const SourceSpec& spec, std::size_t n_symbols, std::uint64_t seed);

}  // namespace ifspec::shaping
