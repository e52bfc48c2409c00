#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerics; the oracles are direct sums, enumeration and
// Boost.Math distributions.

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "ldboot/measures.hpp"
#include "ldboot/rng.hpp"

namespace ldboot::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dirichlet(1, ..., 1) draw, each coordinate at least `floor` before
/// renormalization when floor > 0.
inline FiniteMeasure random_probability(Rng& rng, std::size_t s, double floor = 0.0) {
  std::vector<double> v(s);
  double total = 0.0;
  for (double& x : v) {
    x = -std::log1p(-rng.uniform()) + floor;
    total += x;
  }
  for (double& x : v) x /= total;
  return FiniteMeasure(v);
}

/// sum nu_i log(nu_i / mu_i) term by term.
inline double entropy_sum(const std::vector<double>& nu, const std::vector<double>& mu) {
  double h = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    if (mu[i] == 0.0) return kInf;
    h += nu[i] * std::log(nu[i] / mu[i]);
  }
  return h;
}

/// Minimum over all n! assignments of (1/n) sum |a_i - b_sigma(i)|.
inline double brute_force_w1(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

/// Pearson goodness of fit of integer counts against exact probabilities.
/// Adjacent categories are pooled until each expected count reaches 5.
inline double chi_square_p(const std::vector<std::int64_t>& counts,
                           const std::vector<double>& probs) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0LL));
  std::vector<double> obs;
  std::vector<double> exp;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    o += static_cast<double>(counts[k]);
    e += total * probs[k];
    if (e >= 5.0) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (!exp.empty()) {
    obs.back() += o;
    exp.back() += e;
  }
  if (exp.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  return boost::math::gamma_q(0.5 * static_cast<double>(obs.size() - 1), 0.5 * stat);
}

/// Two-sample chi-square homogeneity test on paired category counts.
inline double two_sample_chi_square_p(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b) {
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), 0LL));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), 0LL));
  double stat = 0.0;
  int categories = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double pooled = static_cast<double>(a[k] + b[k]);
    if (pooled < 10.0) continue;
    const double ea = na * pooled / (na + nb);
    const double eb = nb * pooled / (na + nb);
    stat += (static_cast<double>(a[k]) - ea) * (static_cast<double>(a[k]) - ea) / ea;
    stat += (static_cast<double>(b[k]) - eb) * (static_cast<double>(b[k]) - eb) / eb;
    ++categories;
  }
  if (categories < 2) return 1.0;
  return boost::math::gamma_q(0.5 * (categories - 1), 0.5 * stat);
}

inline double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return 0.5 * d;
}

}  // namespace ldboot::testing
