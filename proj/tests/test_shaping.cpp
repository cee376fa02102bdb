#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ifspec/block_stream.hpp"
#include "ifspec/enumerative.hpp"
#include "ifspec/shaping.hpp"

using namespace ifspec;
using namespace ifspec::shaping;

namespace {

// Block energy moments by direct summation over a list of blocks.
struct Moments {
  double mu = 0, sigma_mu = 0, mu_sigma = 0, pair_cov = 0;
};

Moments direct_moments(const std::vector<std::vector<double>>& energies) {
  Moments m;
  const double nb = static_cast<double>(energies.size());
  const double n = static_cast<double>(energies.front().size());
  for (const auto& b : energies) m.mu += std::accumulate(b.begin(), b.end(), 0.0);
  m.mu /= nb * n;
  for (const auto& b : energies) {
    const double bm = std::accumulate(b.begin(), b.end(), 0.0) / n;
    m.sigma_mu += (bm - m.mu) * (bm - m.mu);
    double v = 0;
    for (double e : b) v += (e - bm) * (e - bm);
    m.mu_sigma += v / n;
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        if (i != j) m.pair_cov += (b[i] - m.mu) * (b[j] - m.mu);
  }
  m.sigma_mu /= nb;
  m.mu_sigma /= nb;
  m.pair_cov /= nb * n * (n - 1);
  return m;
}

std::vector<std::vector<double>> energies(const ShapedBlockStream& s, const std::vector<int>& amps) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < s.block_count(); ++k) {
    std::vector<double> b;
    for (int i : s.block(k)) b.push_back(double(amps[static_cast<std::size_t>(i)]) * amps[static_cast<std::size_t>(i)]);
    out.push_back(b);
  }
  return out;
}

void check_block_identities(const ShapedBlockStream& s, const std::vector<int>& amps) {
  const auto alpha = amplitude_alphabet(amps);
  const auto m = direct_moments(energies(s, amps));
  const int n = s.block_length;
  const double cov = pairwise_energy_covariance(s, alpha);
  const double cov_identity = m.sigma_mu - m.mu_sigma / (n - 1);
  CHECK(std::abs(cov - cov_identity) <= 1e-10 * std::max(std::abs(cov_identity), m.mu * m.mu));
  CHECK(std::abs(cov - m.pair_cov) <= 1e-10 * m.mu * m.mu);
  const auto st = block_stats(s, alpha);
  const double aggregated = m.pair_cov * n * (n - 1) / n;  // pair sum normalized by n_s
  CHECK(std::abs(st.c_corr - aggregated) <= 1e-10 * std::max(std::abs(aggregated), m.mu * m.mu));
  CHECK(std::abs(st.c_corr - ((n - 1) * st.sigma_mu_blk2 - st.mu_sigma_blk2)) <= 1e-12 * m.mu * m.mu);
}

}  // namespace

TEST_CASE("square QAM alphabets") {
  const auto c16 = build_constellation(16);
  CHECK(c16.points.size() == 16);
  CHECK(c16.mean_energy() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c16.energy_variance() == doctest::Approx(0.32).epsilon(1e-12));
  CHECK(c16.entropy_bits() == doctest::Approx(4.0));
  const auto c4 = build_constellation(4);
  CHECK(c4.energy_variance() == doctest::Approx(0.0).epsilon(1e-15));
  const auto raw = build_constellation(64, Normalization::None);
  CHECK(raw.mean_energy() == doctest::Approx(42.0));  // 2 (63) / 3
  CHECK_THROWS_AS(build_constellation(32), ConfigError);
}

TEST_CASE("Maxwell-Boltzmann fit hits the target entropy") {
  const auto c = build_constellation(64);
  for (double rate : {4.0, 4.8, 5.5}) {
    const auto fit = fit_mb(c, rate);
    CHECK(fit.constellation.entropy_bits() == doctest::Approx(rate).epsilon(1e-9));
    CHECK(fit.constellation.mean_energy() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(is_product_form(fit.constellation, 1e-12));
  }
  CHECK(fit_mb(c, 6.0).params.lambda == doctest::Approx(0.0));
  CHECK_THROWS_AS(fit_mb(c, 2.0), ConfigError);  // at most the 4 inner points remain
  CHECK_THROWS_AS(fit_mb(c, 6.5), ConfigError);
}

TEST_CASE("intra-block covariance identities on full codebooks") {
  SUBCASE("CCDM") {
    for (const auto& [amps, counts] :
         std::vector<std::pair<std::vector<int>, std::vector<int>>>{{{1, 3}, {1, 1}},
                                                                    {{1, 3}, {3, 2}},
                                                                    {{1, 3, 5}, {2, 2, 1}},
                                                                    {{1, 3, 5, 7}, {2, 2, 1, 1}},
                                                                    {{1, 3, 5, 7}, {1, 2, 2, 1}}}) {
      const CcdmCodec codec(Composition{counts});
      const auto s = ccdm_codebook(codec);
      check_block_identities(s, amps);
      const auto st = block_stats(s, amplitude_alphabet(amps));
      CHECK(st.sigma_mu_blk2 == doctest::Approx(0.0));
      CHECK(st.mu_sigma_blk2 == doctest::Approx(st.sigma_E2).epsilon(1e-12));
    }
  }
  SUBCASE("two-letter n=2 codebook") {
    const auto s = ccdm_codebook(CcdmCodec(Composition{{1, 1}}));
    const auto st = block_stats(s, amplitude_alphabet({1, 3}));
    CHECK(pairwise_energy_covariance(s, amplitude_alphabet({1, 3})) == doctest::Approx(-st.mu_sigma_blk2));
  }
  SUBCASE("ESS") {
    const std::vector<int> amps{1, 3, 5, 7};
    for (int n = 2; n <= 6; ++n)
      for (int bits : {2, 4, 7}) {
        if (bits > 2 * n) continue;
        const EssCodec codec(amps, n, EssCodec::min_energy_bound(amps, n, bits));
        check_block_identities(ess_codebook(codec), amps);
      }
  }
}

TEST_CASE("single-symbol blocks carry no correction") {
  Rng rng(4);
  const auto c = build_constellation(16);
  const auto s = iid_stream(c, 4096, 1, rng);
  const auto st = block_stats(s, c);
  CHECK(st.mu_sigma_blk2 == 0.0);
  CHECK(st.c_corr == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(st.sigma_mu_blk2 == doctest::Approx(st.sigma_E2));
  CHECK_THROWS_AS(pairwise_energy_covariance(s, c), ConfigError);
}

TEST_CASE("Psi_2D of a symmetric square alphabet reduces to mu_E^2") {
  Rng rng(5);
  const auto c = build_constellation(64);
  const auto s = iid_stream(c, 1 << 16, 1, rng);
  const auto st = block_stats(s, c);
  CHECK(st.psi_2d >= st.mu_E * st.mu_E);
  CHECK(st.psi_2d == doctest::Approx(st.mu_E * st.mu_E).epsilon(2e-3));
  // a one-dimensional alphabet is maximally imbalanced: Psi_2D = 2 mu_E^2
  const auto line = amplitude_alphabet({1, 3});
  ShapedBlockStream one;
  one.symbols = {0, 1, 1, 0, 1, 0};
  const auto s1 = block_stats(one, line);
  CHECK(s1.psi_2d == doctest::Approx(2.0 * s1.mu_E * s1.mu_E));
}

TEST_CASE("shaped sources") {
  SUBCASE("ESS stream respects the energy bound and is deterministic") {
    const SourceSpec spec{64, ShapingMethod::Ess, 4.8, 18};
    const auto a = make_source(spec, 18 * 200, 11);
    const auto b = make_source(spec, 18 * 200, 11);
    CHECK(a.stream.symbols == b.stream.symbols);
    CHECK(a.stream.symbols.size() % 18 == 0);
    CHECK(a.constellation.mean_energy() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(a.stream.e_max.has_value());
    for (std::size_t k = 0; k < a.stream.block_count(); ++k) {
      double e = 0;
      for (int s : a.stream.block(k)) e += std::norm(a.constellation.points[static_cast<std::size_t>(s)]);
      CHECK(e <= *a.stream.e_max * (1 + 1e-12));
    }
    CHECK(a.information_rate > 4.5);
    CHECK(a.information_rate <= 6.0);
  }
  SUBCASE("CCDM blocks have a fixed per-dimension composition") {
    const auto src = make_source({16, ShapingMethod::Ccdm, 3.5, 12}, 12 * 50, 2);
    REQUIRE(src.composition.has_value());
    const auto layout = pas_layout(src.constellation);
    for (std::size_t k = 0; k < src.stream.block_count(); ++k) {
      std::vector<int> hist(layout.amplitudes.size(), 0);
      for (int s : src.stream.block(k)) {
        const int li = s / layout.side;
        const int amp = std::abs(2 * li - layout.side + 1);
        ++hist[static_cast<std::size_t>((amp - 1) / 2)];
      }
      CHECK(hist == src.composition->counts);
    }
  }
  SUBCASE("uniform sources draw every point") {
    const auto src = make_source({16, ShapingMethod::Iid, 0.0, 1}, 1 << 14, 3);
    const auto p = empirical_probs(src.stream, 16);
    for (double x : p) CHECK(x == doctest::Approx(1.0 / 16).epsilon(0.1));
    CHECK(src.information_rate == doctest::Approx(4.0));
  }
}
