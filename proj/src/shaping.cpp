#include "ifspec/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ifspec::shaping {

double Constellation::mean_energy() const {
  double m = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) m += probs[i] * std::norm(points[i]);
  return m;
}

double Constellation::energy_variance() const {
  const double mu = mean_energy();
  double v = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = std::norm(points[i]) - mu;
    v += probs[i] * d * d;
  }
  return v;
}

double Constellation::entropy_bits() const { return shaping::entropy_bits(probs); }

Constellation Constellation::normalized() const {
  const double mu = mean_energy();
  if (!(mu > 0.0)) throw ConfigError("cannot normalize a zero-energy constellation");
  Constellation out = *this;
  const double scale = 1.0 / std::sqrt(mu);
  for (auto& p : out.points) p *= scale;
  return out;
}

Constellation Constellation::with_probs(RVector p) const {
  Constellation out = from_points(points, std::move(p));
  out.order = order;
  return out;
}

Constellation build_constellation(int order, Normalization norm) {
  if (order != 4 && order != 16 && order != 64 && order != 256)
    throw ConfigError("unsupported QAM order " + std::to_string(order) +
                      " (expected 4, 16, 64 or 256)");
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  Constellation c;
  c.order = order;
  c.points.reserve(static_cast<std::size_t>(order));
  for (int li = 0; li < side; ++li)
    for (int lq = 0; lq < side; ++lq)
      c.points.emplace_back(2 * li - side + 1, 2 * lq - side + 1);
  c.probs.assign(static_cast<std::size_t>(order), 1.0 / order);
  return norm == Normalization::UnitMeanEnergy ? c.normalized() : c;
}

Constellation from_points(std::vector<cplx> points, RVector probs) {
  if (points.empty() || points.size() != probs.size())
    throw ConfigError("constellation needs one probability per point");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ConfigError("constellation probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("constellation probabilities must sum to 1");
  Constellation c;
  c.order = static_cast<int>(points.size());
  c.points = std::move(points);
  c.probs = std::move(probs);
  return c;
}

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

RVector mb_probabilities(const Constellation& c, double lambda) {
  double e_min = std::numeric_limits<double>::infinity();
  for (const auto& a : c.points) e_min = std::min(e_min, std::norm(a));
  RVector p(c.points.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(-lambda * (std::norm(c.points[i]) - e_min));
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

MbFit fit_mb(const Constellation& c, double target_rate) {
  const double h_max = std::log2(static_cast<double>(c.points.size()));
  double e_min = std::numeric_limits<double>::infinity();
  for (const auto& a : c.points) e_min = std::min(e_min, std::norm(a));
  const auto n_min = std::count_if(c.points.begin(), c.points.end(), [&](const cplx& a) {
    return std::norm(a) <= e_min * (1.0 + 1e-12);
  });
  const double h_min = std::log2(static_cast<double>(n_min));
  if (!(target_rate > h_min) || target_rate > h_max + 1e-12)
    throw ConfigError("target rate " + std::to_string(target_rate) + " bits/symbol infeasible; need (" +
                      std::to_string(h_min) + ", " + std::to_string(h_max) + "]");

  auto entropy_at = [&](double lambda) { return entropy_bits(mb_probabilities(c, lambda)); };

  double lo = 0.0;
  double hi = 0.0;
  if (target_rate < h_max - 1e-13) {
    // Scale so lambda is dimensionless w.r.t. the alphabet's mean energy.
    hi = 1.0 / std::max(c.mean_energy(), 1e-300);
    while (entropy_at(hi) > target_rate) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (entropy_at(mid) > target_rate ? lo : hi) = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);

  MbFit fit;
  fit.params = {lambda, target_rate};
  fit.constellation = c.with_probs(mb_probabilities(c, lambda));
  const double mu = fit.constellation.mean_energy();
  fit.constellation = fit.constellation.normalized();
  // Keep lambda meaningful for the renormalized point set.
  fit.params.lambda = lambda * mu;
  return fit;
}

int PasLayout::level(int amplitude_index, bool negative) const {
  // amplitude a_j = 2j + 1, grid value 2l - side + 1.
  const int a = amplitudes.at(static_cast<std::size_t>(amplitude_index));
  const int value = negative ? -a : a;
  return (value + side - 1) / 2;
}

RVector PasLayout::amplitude_marginal(const Constellation& c) const {
  RVector m(amplitudes.size(), 0.0);
  for (int li = 0; li < side; ++li) {
    const int a = std::abs(2 * li - side + 1);
    const auto j = static_cast<std::size_t>((a - 1) / 2);
    for (int lq = 0; lq < side; ++lq) m[j] += c.probs[static_cast<std::size_t>(point_index(li, lq))];
  }
  return m;
}

PasLayout pas_layout(const Constellation& c) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.points.size()))));
  if (side * side != static_cast<int>(c.points.size()) || side < 2 || side % 2 != 0)
    throw ConfigError("amplitude shaping needs a square QAM alphabet");
  PasLayout layout;
  layout.side = side;
  for (int a = 1; a < side; a += 2) layout.amplitudes.push_back(a);
  return layout;
}

bool is_product_form(const Constellation& c, double tol) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.points.size()))));
  if (side * side != static_cast<int>(c.points.size())) return false;
  RVector pi(static_cast<std::size_t>(side), 0.0), pq(static_cast<std::size_t>(side), 0.0);
  for (int li = 0; li < side; ++li)
    for (int lq = 0; lq < side; ++lq) {
      const double p = c.probs[static_cast<std::size_t>(li * side + lq)];
      pi[static_cast<std::size_t>(li)] += p;
      pq[static_cast<std::size_t>(lq)] += p;
    }
  for (int li = 0; li < side; ++li)
    for (int lq = 0; lq < side; ++lq)
      if (std::abs(c.probs[static_cast<std::size_t>(li * side + lq)] -
                   pi[static_cast<std::size_t>(li)] * pq[static_cast<std::size_t>(lq)]) > tol)
        return false;
  return true;
}

}  // namespace ifspec::shaping
