#include <numeric>
#include <string>

#include "ifspec/enumerative.hpp"

namespace ifspec::shaping {
namespace {

struct ReducedAlphabet {
  long long e_min = 0;
  long long step = 1;
  std::vector<long long> reduced;
};

ReducedAlphabet reduce(const std::vector<int>& amplitudes) {
  if (amplitudes.empty()) throw ConfigError("ESS needs at least one amplitude level");
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    if (amplitudes[j] <= 0) throw ConfigError("ESS amplitudes must be positive");
    if (j > 0 && amplitudes[j] <= amplitudes[j - 1]) throw ConfigError("ESS amplitudes must be strictly increasing");
  }
  ReducedAlphabet r;
  r.e_min = static_cast<long long>(amplitudes.front()) * amplitudes.front();
  long long g = 0;
  for (int a : amplitudes) g = std::gcd(g, static_cast<long long>(a) * a - r.e_min);
  r.step = g == 0 ? 1 : g;
  for (int a : amplitudes) r.reduced.push_back((static_cast<long long>(a) * a - r.e_min) / r.step);
  return r;
}

std::vector<std::vector<BigInt>> build_trellis(const std::vector<long long>& reduced, int n, std::size_t budget) {
  std::vector<std::vector<BigInt>> t(static_cast<std::size_t>(n) + 1, std::vector<BigInt>(budget + 1));
  for (auto& v : t[0]) v = 1;
  for (std::size_t r = 1; r <= static_cast<std::size_t>(n); ++r)
    for (std::size_t b = 0; b <= budget; ++b) {
      BigInt sum = 0;
      for (long long e : reduced) {
        if (static_cast<std::size_t>(e) > b) break;
        sum += t[r - 1][b - static_cast<std::size_t>(e)];
      }
      t[r][b] = std::move(sum);
    }
  return t;
}

}  // namespace

EssCodec::EssCodec(std::vector<int> amplitudes, int block_length, long long e_max)
    : amplitudes_(std::move(amplitudes)), n_(block_length), e_max_(e_max) {
  if (n_ < 1) throw ConfigError("ESS block length must be positive");
  const auto alpha = reduce(amplitudes_);
  reduced_ = alpha.reduced;
  const long long floor_energy = alpha.e_min * n_;
  if (e_max_ < floor_energy)
    throw ConfigError("ESS energy bound " + std::to_string(e_max_) + " is below the minimum block energy " +
                      std::to_string(floor_energy));
  budget_ = static_cast<std::size_t>((e_max_ - floor_energy) / alpha.step);
  // Budgets beyond n * max reduced energy admit every sequence.
  budget_ = std::min<std::size_t>(budget_, static_cast<std::size_t>(reduced_.back() * n_));
  table_ = build_trellis(reduced_, n_, budget_);
  input_bits_ = floor_log2(sequence_count());
}

long long EssCodec::min_energy_bound(const std::vector<int>& amplitudes, int block_length, int bits) {
  if (block_length < 1) throw ConfigError("ESS block length must be positive");
  if (bits < 0) throw ConfigError("ESS bit count must be nonnegative");
  const auto alpha = reduce(amplitudes);
  const auto full = static_cast<std::size_t>(alpha.reduced.back() * block_length);
  const auto t = build_trellis(alpha.reduced, block_length, full);
  const BigInt target = BigInt(1) << bits;
  const auto& last = t[static_cast<std::size_t>(block_length)];
  for (std::size_t b = 0; b <= full; ++b)
    if (last[b] >= target)
      return alpha.e_min * block_length + static_cast<long long>(b) * alpha.step;
  throw ConfigError("ESS cannot carry " + std::to_string(bits) + " bits with " +
                    std::to_string(amplitudes.size()) + " levels and block length " + std::to_string(block_length));
}

std::vector<int> EssCodec::unrank(BigInt index) const {
  if (index < 0 || index >= sequence_count()) throw ConfigError("ESS index overflow");
  std::vector<int> block;
  block.reserve(static_cast<std::size_t>(n_));
  std::size_t b = budget_;
  for (int r = n_; r >= 1; --r) {
    for (std::size_t j = 0; j < reduced_.size(); ++j) {
      const auto e = static_cast<std::size_t>(reduced_[j]);
      // Levels are sorted, so the remaining ones all exceed the budget too.
      if (e > b) throw ConfigError("ESS trellis inconsistency");
      const BigInt& sub = table_[static_cast<std::size_t>(r - 1)][b - e];
      if (index < sub) {
        block.push_back(static_cast<int>(j));
        b -= e;
        break;
      }
      index -= sub;
    }
  }
  return block;
}

BigInt EssCodec::rank(std::span<const int> block) const {
  if (static_cast<int>(block.size()) != n_) throw ConfigError("ESS block length mismatch");
  BigInt index = 0;
  std::size_t b = budget_;
  int r = n_;
  for (int letter : block) {
    if (letter < 0 || static_cast<std::size_t>(letter) >= reduced_.size())
      throw ConfigError("ESS amplitude index out of range");
    const auto e = static_cast<std::size_t>(reduced_[static_cast<std::size_t>(letter)]);
    if (e > b) throw ConfigError("ESS block exceeds the energy bound");
    for (int j = 0; j < letter; ++j)
      index += table_[static_cast<std::size_t>(r - 1)][b - static_cast<std::size_t>(reduced_[static_cast<std::size_t>(j)])];
    b -= e;
    --r;
  }
  return index;
}

std::vector<int> EssCodec::encode(std::span<const std::uint8_t> bits) const {
  if (static_cast<int>(bits.size()) > input_bits_)
    throw ConfigError("ESS input of " + std::to_string(bits.size()) + " bits exceeds capacity of " +
                      std::to_string(input_bits_));
  return unrank(bits_to_index(bits));
}

Bits EssCodec::decode(std::span<const int> block) const { return index_to_bits(rank(block), input_bits_); }

}  // namespace ifspec::shaping
