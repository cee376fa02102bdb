#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ifspec/enumerative.hpp"

namespace ifspec::shaping {

int floor_log2(const BigInt& x) {
  if (x < 1) throw ConfigError("floor_log2 needs a positive argument");
  return static_cast<int>(boost::multiprecision::msb(x));
}

BigInt bits_to_index(std::span<const std::uint8_t> bits) {
  BigInt v = 0;
  for (auto b : bits) {
    v <<= 1;
    if (b) v += 1;
  }
  return v;
}

Bits index_to_bits(const BigInt& index, int n_bits) {
  if (index < 0 || (index > 0 && floor_log2(index) >= n_bits))
    throw ConfigError("index does not fit in " + std::to_string(n_bits) + " bits");
  Bits bits(static_cast<std::size_t>(n_bits));
  for (int i = 0; i < n_bits; ++i)
    bits[static_cast<std::size_t>(n_bits - 1 - i)] = boost::multiprecision::bit_test(index, static_cast<unsigned>(i)) ? 1 : 0;
  return bits;
}

int Composition::length() const { return std::accumulate(counts.begin(), counts.end(), 0); }

Composition quantize_composition(std::span<const double> probs, int n) {
  if (n < 1) throw ConfigError("composition length must be positive");
  if (probs.empty()) throw ConfigError("composition needs a nonempty distribution");
  Composition comp;
  comp.counts.assign(probs.size(), 0);
  // D(type||p) = (1/n) sum_j c_j ln(c_j / (n p_j)) is separable and convex
  // in each c_j, so adding one unit at a time to the cheapest letter is optimal.
  auto cost = [&](std::size_t j, int c) {
    if (c == 0) return 0.0;
    if (!(probs[j] > 0.0)) return std::numeric_limits<double>::infinity();
    return c * std::log(c / (n * probs[j]));
  };
  for (int step = 0; step < n; ++step) {
    std::size_t best = probs.size();
    double best_delta = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < probs.size(); ++j) {
      const double delta = cost(j, comp.counts[j] + 1) - cost(j, comp.counts[j]);
      if (delta < best_delta) {
        best_delta = delta;
        best = j;
      }
    }
    if (best == probs.size()) throw ConfigError("distribution has no positive mass");
    ++comp.counts[best];
  }
  return comp;
}

namespace {

BigInt multinomial(const std::vector<int>& counts) {
  BigInt m = 1;
  int total = 0;
  for (int c : counts) {
    // m *= C(total + c, c), built incrementally so every division is exact.
    for (int i = 1; i <= c; ++i) {
      m *= total + i;
      m /= i;
    }
    total += c;
  }
  return m;
}

}  // namespace

CcdmCodec::CcdmCodec(Composition composition) : composition_(std::move(composition)) {
  if (composition_.counts.empty()) throw ConfigError("empty composition");
  for (int c : composition_.counts)
    if (c < 0) throw ConfigError("composition counts must be nonnegative");
  if (composition_.length() < 1) throw ConfigError("composition must describe at least one symbol");
  count_ = multinomial(composition_.counts);
  input_bits_ = floor_log2(count_);
}

std::vector<int> CcdmCodec::unrank(const BigInt& index_in) const {
  if (index_in < 0 || index_in >= count_) throw ConfigError("CCDM index out of range");
  BigInt index = index_in;
  auto counts = composition_.counts;
  int remaining = block_length();
  BigInt m = count_;
  std::vector<int> block;
  block.reserve(static_cast<std::size_t>(remaining));
  while (remaining > 0) {
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) continue;
      // Sequences that start with letter j.
      BigInt sub = m * counts[j] / remaining;
      if (index < sub) {
        block.push_back(static_cast<int>(j));
        --counts[j];
        --remaining;
        m = std::move(sub);
        break;
      }
      index -= sub;
    }
  }
  return block;
}

BigInt CcdmCodec::rank(std::span<const int> block) const {
  if (static_cast<int>(block.size()) != block_length())
    throw ConfigError("block length does not match composition length");
  auto counts = composition_.counts;
  int remaining = block_length();
  BigInt m = count_;
  BigInt index = 0;
  for (int letter : block) {
    if (letter < 0 || static_cast<std::size_t>(letter) >= counts.size() || counts[static_cast<std::size_t>(letter)] == 0)
      throw ConfigError("block does not match the composition");
    for (int j = 0; j < letter; ++j)
      if (counts[static_cast<std::size_t>(j)] > 0) index += m * counts[static_cast<std::size_t>(j)] / remaining;
    m = m * counts[static_cast<std::size_t>(letter)] / remaining;
    --counts[static_cast<std::size_t>(letter)];
    --remaining;
  }
  return index;
}

std::vector<int> CcdmCodec::encode(std::span<const std::uint8_t> bits) const {
  if (static_cast<int>(bits.size()) > input_bits_)
    throw ConfigError("CCDM input of " + std::to_string(bits.size()) + " bits exceeds capacity of " +
                      std::to_string(input_bits_));
  return unrank(bits_to_index(bits));
}

Bits CcdmCodec::decode(std::span<const int> block) const { return index_to_bits(rank(block), input_bits_); }

}  // namespace ifspec::shaping
