#include "ifspec/block_stream.hpp"

#include <algorithm>
#include <cmath>

namespace ifspec::shaping {

std::string to_string(ShapingMethod m) {
  switch (m) {
    case ShapingMethod::Ccdm: return "ccdm";
    case ShapingMethod::Ess: return "ess";
    case ShapingMethod::Iid: return "iid";
  }
  return "?";
}

ShapingMethod parse_shaping_method(const std::string& s) {
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "ccdm") return ShapingMethod::Ccdm;
  if (lower == "ess") return ShapingMethod::Ess;
  if (lower == "iid" || lower == "uniform" || lower == "unshaped") return ShapingMethod::Iid;
  throw ConfigError("unknown shaping method '" + s + "' (expected ccdm, ess or iid)");
}

namespace {

void check_stream(const ShapedBlockStream& stream, const Constellation& c) {
  if (stream.block_length < 1) throw ConfigError("block length must be at least 1");
  if (stream.symbols.empty()) throw ConfigError("empty block stream");
  if (stream.symbols.size() % static_cast<std::size_t>(stream.block_length) != 0)
    throw ConfigError("stream length is not a whole number of blocks");
  for (int s : stream.symbols)
    if (s < 0 || static_cast<std::size_t>(s) >= c.points.size())
      throw ConfigError("symbol index outside the constellation");
}

}  // namespace

BlockStats block_stats(const ShapedBlockStream& stream, const Constellation& c) {
  check_stream(stream, c);
  const auto n = static_cast<std::size_t>(stream.block_length);
  const std::size_t total = stream.symbols.size();

  BlockStats st;
  st.block_length = stream.block_length;
  st.blocks = stream.block_count();

  double sum_e = 0.0, sum_i2 = 0.0, sum_q2 = 0.0, sum_iq = 0.0;
  for (int s : stream.symbols) {
    const cplx a = c.points[static_cast<std::size_t>(s)];
    sum_e += std::norm(a);
    sum_i2 += a.real() * a.real();
    sum_q2 += a.imag() * a.imag();
    sum_iq += a.real() * a.imag();
  }
  const double nt = static_cast<double>(total);
  st.mu_E = sum_e / nt;
  st.mu_I2 = sum_i2 / nt;
  st.mu_Q2 = sum_q2 / nt;
  st.mu_IQ = sum_iq / nt;

  double sum_var = 0.0, sum_intra = 0.0, sum_between = 0.0;
  for (std::size_t k = 0; k < st.blocks; ++k) {
    const auto blk = stream.block(k);
    double m = 0.0;
    for (int s : blk) m += std::norm(c.points[static_cast<std::size_t>(s)]);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (int s : blk) {
      const double e = std::norm(c.points[static_cast<std::size_t>(s)]);
      v += (e - m) * (e - m);
      sum_var += (e - st.mu_E) * (e - st.mu_E);
    }
    sum_intra += v / static_cast<double>(n);
    sum_between += (m - st.mu_E) * (m - st.mu_E);
  }
  const double nb = static_cast<double>(st.blocks);
  st.sigma_E2 = sum_var / nt;
  st.mu_sigma_blk2 = sum_intra / nb;
  st.sigma_mu_blk2 = sum_between / nb;
  st.c_corr = (static_cast<double>(n) - 1.0) * st.sigma_mu_blk2 - st.mu_sigma_blk2;
  const double imbalance = st.mu_I2 - st.mu_Q2;
  st.psi_2d = st.mu_E * st.mu_E + imbalance * imbalance + 4.0 * st.mu_IQ * st.mu_IQ;
  return st;
}

double pairwise_energy_covariance(const ShapedBlockStream& stream, const Constellation& c) {
  check_stream(stream, c);
  if (stream.block_length < 2) throw ConfigError("pairwise covariance needs block length >= 2");
  const auto n = static_cast<std::size_t>(stream.block_length);
  double mu = 0.0;
  for (int s : stream.symbols) mu += std::norm(c.points[static_cast<std::size_t>(s)]);
  mu /= static_cast<double>(stream.symbols.size());

  double acc = 0.0;
  std::vector<double> dev(n);
  for (std::size_t k = 0; k < stream.block_count(); ++k) {
    const auto blk = stream.block(k);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::norm(c.points[static_cast<std::size_t>(blk[i])]) - mu;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += dev[i] * dev[j];
  }
  return acc / (static_cast<double>(stream.block_count()) * static_cast<double>(n) * static_cast<double>(n - 1));
}

ShapedBlockStream ccdm_codebook(const CcdmCodec& codec) {
  ShapedBlockStream s;
  s.block_length = codec.block_length();
  s.method = ShapingMethod::Ccdm;
  for (BigInt i = 0; i < codec.sequence_count(); ++i) {
    const auto blk = codec.unrank(i);
    s.symbols.insert(s.symbols.end(), blk.begin(), blk.end());
  }
  return s;
}

ShapedBlockStream ess_codebook(const EssCodec& codec) {
  ShapedBlockStream s;
  s.block_length = codec.block_length();
  s.method = ShapingMethod::Ess;
  s.e_max = static_cast<double>(codec.e_max());
  for (BigInt i = 0; i < codec.sequence_count(); ++i) {
    const auto blk = codec.unrank(i);
    s.symbols.insert(s.symbols.end(), blk.begin(), blk.end());
  }
  return s;
}

Constellation amplitude_alphabet(const std::vector<int>& amplitudes) {
  std::vector<cplx> pts;
  for (int a : amplitudes) pts.emplace_back(a, 0.0);
  return from_points(std::move(pts), RVector(amplitudes.size(), 1.0 / static_cast<double>(amplitudes.size())));
}

Bits random_bits(int n, Rng& rng) {
  Bits bits(static_cast<std::size_t>(n));
  std::uint64_t word = 0;
  int left = 0;
  for (auto& b : bits) {
    if (left == 0) {
      word = rng();
      left = 64;
    }
    b = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
    --left;
  }
  return bits;
}

namespace {

template <class Codec>
ShapedBlockStream pas_stream(const PasLayout& layout, const Codec& codec, int bits_per_block, std::size_t blocks,
                             ShapingMethod method, Rng& rng) {
  const int n = codec.block_length();
  ShapedBlockStream s;
  s.block_length = n;
  s.method = method;
  s.symbols.reserve(blocks * static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < blocks; ++k) {
    const auto amp_i = codec.encode(random_bits(bits_per_block, rng));
    const auto amp_q = codec.encode(random_bits(bits_per_block, rng));
    const auto signs = random_bits(2 * n, rng);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const int li = layout.level(amp_i[ui], signs[2 * ui] != 0);
      const int lq = layout.level(amp_q[ui], signs[2 * ui + 1] != 0);
      s.symbols.push_back(layout.point_index(li, lq));
    }
  }
  return s;
}

std::size_t draw_inverse_cdf(const RVector& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

RVector cumulative(const RVector& p) {
  RVector cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
  cdf.back() = 1.0;
  return cdf;
}

}  // namespace

ShapedBlockStream ccdm_stream(const PasLayout& layout, const CcdmCodec& codec, std::size_t blocks, Rng& rng) {
  if (codec.composition().counts.size() != layout.amplitudes.size())
    throw ConfigError("composition size does not match the amplitude alphabet");
  return pas_stream(layout, codec, codec.input_bits(), blocks, ShapingMethod::Ccdm, rng);
}

ShapedBlockStream ess_stream(const PasLayout& layout, const EssCodec& codec, std::size_t blocks, Rng& rng) {
  if (codec.amplitudes() != layout.amplitudes) throw ConfigError("ESS amplitudes do not match the QAM layout");
  auto s = pas_stream(layout, codec, codec.input_bits(), blocks, ShapingMethod::Ess, rng);
  s.e_max = 2.0 * static_cast<double>(codec.e_max());
  return s;
}

ShapedBlockStream iid_stream(const Constellation& c, std::size_t n_symbols, int block_length, Rng& rng) {
  if (block_length < 1) throw ConfigError("block length must be at least 1");
  ShapedBlockStream s;
  s.block_length = block_length;
  s.method = ShapingMethod::Iid;
  const std::size_t n = (n_symbols + static_cast<std::size_t>(block_length) - 1) /
                        static_cast<std::size_t>(block_length) * static_cast<std::size_t>(block_length);
  s.symbols.reserve(n);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  if (is_product_form(c)) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.points.size()))));
    RVector pi(static_cast<std::size_t>(side), 0.0), pq(static_cast<std::size_t>(side), 0.0);
    for (int li = 0; li < side; ++li)
      for (int lq = 0; lq < side; ++lq) {
        pi[static_cast<std::size_t>(li)] += c.probs[static_cast<std::size_t>(li * side + lq)];
        pq[static_cast<std::size_t>(lq)] += c.probs[static_cast<std::size_t>(li * side + lq)];
      }
    const auto cdf_i = cumulative(pi);
    const auto cdf_q = cumulative(pq);
    for (std::size_t k = 0; k < n; ++k) {
      const auto li = draw_inverse_cdf(cdf_i, uni(rng));
      const auto lq = draw_inverse_cdf(cdf_q, uni(rng));
      s.symbols.push_back(static_cast<int>(li) * side + static_cast<int>(lq));
    }
  } else {
    const auto cdf = cumulative(c.probs);
    for (std::size_t k = 0; k < n; ++k) s.symbols.push_back(static_cast<int>(draw_inverse_cdf(cdf, uni(rng))));
  }
  return s;
}

RVector empirical_probs(const ShapedBlockStream& stream, std::size_t alphabet_size) {
  RVector p(alphabet_size, 0.0);
  for (int s : stream.symbols) p.at(static_cast<std::size_t>(s)) += 1.0;
  for (auto& v : p) v /= static_cast<double>(stream.symbols.size());
  return p;
}

ShapedSource make_source(const SourceSpec& spec, std::size_t n_symbols, std::uint64_t seed) {
  if (spec.block_length < 1) throw ConfigError("block length must be at least 1");
  if (n_symbols == 0) throw ConfigError("source needs at least one symbol");
  const Constellation base = build_constellation(spec.order);
  const double full_rate = std::log2(static_cast<double>(spec.order));
  const bool uniform = spec.target_rate <= 0.0 || spec.target_rate >= full_rate - 1e-12;

  ShapedSource src;
  src.spec = spec;
  Constellation target = base;
  src.mb = {0.0, full_rate};
  if (!uniform) {
    auto fit = fit_mb(base, spec.target_rate);
    target = fit.constellation;
    src.mb = fit.params;
  }

  Rng rng(seed);
  const auto n = static_cast<std::size_t>(spec.block_length);
  const std::size_t blocks = (n_symbols + n - 1) / n;

  switch (spec.method) {
    case ShapingMethod::Iid: {
      src.stream = iid_stream(target, blocks * n, spec.block_length, rng);
      src.information_rate = target.entropy_bits();
      break;
    }
    case ShapingMethod::Ccdm: {
      const auto layout = pas_layout(target);
      const auto comp = quantize_composition(layout.amplitude_marginal(target), spec.block_length);
      const CcdmCodec codec(comp);
      src.composition = comp;
      src.amplitude_bits = codec.input_bits();
      src.stream = ccdm_stream(layout, codec, blocks, rng);
      src.information_rate = 2.0 * (codec.input_bits() + spec.block_length) / static_cast<double>(spec.block_length);
      break;
    }
    case ShapingMethod::Ess: {
      if (uniform && spec.target_rate <= 0.0) throw ConfigError("ESS needs a target rate");
      const auto layout = pas_layout(base);
      // Target rate counts sign bits; each dimension carries one sign per symbol.
      const double amp_rate = spec.target_rate / 2.0 - 1.0;
      if (!(amp_rate > 0.0)) throw ConfigError("ESS target rate must exceed 2 bits/symbol");
      const int bits = static_cast<int>(std::ceil(amp_rate * spec.block_length - 1e-9));
      const long long bound = EssCodec::min_energy_bound(layout.amplitudes, spec.block_length, bits);
      const EssCodec codec(layout.amplitudes, spec.block_length, bound);
      src.ess_bound = bound;
      src.amplitude_bits = bits;
      auto stream = pas_stream(layout, codec, bits, blocks, ShapingMethod::Ess, rng);
      stream.e_max = 2.0 * static_cast<double>(bound);
      src.stream = std::move(stream);
      src.information_rate = 2.0 * (bits + spec.block_length) / static_cast<double>(spec.block_length);
      break;
    }
  }

  // Empirical distribution on the unscaled grid, then rescale to unit mean energy.
  const Constellation grid = build_constellation(spec.order, Normalization::None);
  Constellation emp = grid.with_probs(empirical_probs(src.stream, grid.points.size()));
  const double grid_energy = emp.mean_energy();
  src.constellation = emp.normalized();
  if (src.stream.e_max) *src.stream.e_max /= grid_energy;
  return src;
}

}  // namespace ifspec::shaping
