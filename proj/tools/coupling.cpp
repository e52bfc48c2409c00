#include "coupling.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "ldboot/errors.hpp"
#include "ldboot/rng.hpp"
#include "ldboot/samplers.hpp"

namespace ldboot::cli {

namespace {

// Both inputs sorted ascending, equal length.
double sorted_w1(const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

void insertion_sort(std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double key = v[i];
    std::size_t j = i;
    for (; j > 0 && v[j - 1] > key; --j) v[j] = v[j - 1];
    v[j] = key;
  }
}

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

ChiSquare pooled_chi_square(const std::vector<std::int64_t>& observed,
                            const std::vector<double>& expected) {
  std::vector<double> obs_bins;
  std::vector<double> exp_bins;
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    obs_acc += static_cast<double>(observed[k]);
    exp_acc += expected[k];
    if (exp_acc >= 5.0) {
      obs_bins.push_back(obs_acc);
      exp_bins.push_back(exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (exp_bins.empty()) {
      obs_bins.push_back(obs_acc);
      exp_bins.push_back(exp_acc);
    } else {
      obs_bins.back() += obs_acc;
      exp_bins.back() += exp_acc;
    }
  }
  ChiSquare out;
  for (std::size_t i = 0; i < obs_bins.size(); ++i) {
    if (exp_bins[i] <= 0.0) continue;
    const double d = obs_bins[i] - exp_bins[i];
    out.statistic += d * d / exp_bins[i];
  }
  out.dof = static_cast<int>(obs_bins.size()) - 1;
  if (out.dof > 0) {
    out.p_value = boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic);
  }
  return out;
}

}  // namespace

CouplingReport run_coupling_diagnostics(const CouplingConfig& config, std::uint64_t seed) {
  const std::int64_t n = config.n;
  const std::int64_t m = config.m;
  if (n < 1 || m < 1) throw ConfigError("couple: n and m must be positive");
  if (config.replications < 1) throw ConfigError("couple: replications must be positive");
  if (config.competitors < 0) throw ConfigError("couple: competitors must be nonnegative");

  Rng rng = Rng::stream(seed, 2, 0);
  Rng competitor_rng = Rng::stream(seed, 2, 1);
  const double scale = static_cast<double>(n) / static_cast<double>(m);
  const auto cells = static_cast<std::size_t>(n);

  CouplingReport report;
  std::vector<std::int64_t> first_cell(static_cast<std::size_t>(m) + 1, 0);
  std::int64_t exact_sum = 0;
  double w1_total = 0.0;
  double moved_total = 0.0;
  std::vector<double> zs(cells);
  std::vector<double> ms(cells);
  std::vector<double> ms_sorted(cells);
  std::vector<double> x(cells);
  std::vector<std::int64_t> cell_counts(cells);
  std::vector<std::int64_t> value_counts(static_cast<std::size_t>(m) + 1);

  for (std::int64_t r = 0; r < config.replications; ++r) {
    const CouplingOutcome draw = couple_poisson_multinomial(n, m, rng);
    ++first_cell[static_cast<std::size_t>(draw.m[0])];
    report.first_cell_always_m = report.first_cell_always_m && (n > 1 || draw.m[0] == m);
    std::int64_t z_sum = 0;
    for (std::size_t i = 0; i < cells; ++i) {
      zs[i] = scale * static_cast<double>(draw.z[i]);
      ms[i] = scale * static_cast<double>(draw.m[i]);
      z_sum += draw.z[i];
    }
    if (z_sum == m) ++exact_sum;
    moved_total += static_cast<double>(draw.moved_mass);
    std::sort(zs.begin(), zs.end());
    ms_sorted = ms;
    std::sort(ms_sorted.begin(), ms_sorted.end());
    const double w1_m = sorted_w1(ms_sorted, zs);
    w1_total += w1_m;

    for (int c = 0; c < config.competitors; ++c) {
      switch (c % 3) {
        case 0: {
          // Counting sort: the atoms are multiples of n/m.
          std::fill(cell_counts.begin(), cell_counts.end(), 0);
          for (std::int64_t ball = 0; ball < m; ++ball) {
            ++cell_counts[competitor_rng.uniform_index(static_cast<std::uint64_t>(n))];
          }
          std::fill(value_counts.begin(), value_counts.end(), 0);
          for (std::int64_t k : cell_counts) ++value_counts[static_cast<std::size_t>(k)];
          std::size_t pos = 0;
          for (std::size_t k = 0; k < value_counts.size(); ++k) {
            for (std::int64_t t = 0; t < value_counts[k]; ++t) {
              x[pos++] = scale * static_cast<double>(k);
            }
          }
          break;
        }
        case 1: {
          double total = 0.0;
          for (double& v : x) {
            v = -std::log1p(-competitor_rng.uniform());
            total += v;
          }
          for (double& v : x) v *= static_cast<double>(n) / total;
          std::sort(x.begin(), x.end());
          break;
        }
        default: {
          // W1 only sees the multiset, so perturb the sorted copy and
          // restore the order by insertion.
          x = ms_sorted;
          if (n > 1) {
            const auto from = competitor_rng.uniform_index(static_cast<std::uint64_t>(n));
            const auto to = competitor_rng.uniform_index(static_cast<std::uint64_t>(n));
            const double moved = competitor_rng.uniform() * x[from];
            x[from] -= moved;
            x[to] += moved;
            insertion_sort(x);
          }
          break;
        }
      }
      const double w1_x = sorted_w1(x, zs);
      ++report.comparisons;
      if (w1_m > w1_x + 1e-12 * (1.0 + w1_x)) ++report.violations;
    }
  }

  const auto reps = static_cast<double>(config.replications);
  const boost::math::binomial_distribution<double> binomial(static_cast<double>(m),
                                                            1.0 / static_cast<double>(n));
  std::vector<double> expected(first_cell.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    expected[k] = reps * boost::math::pdf(binomial, static_cast<double>(k));
  }
  const ChiSquare chi = pooled_chi_square(first_cell, expected);
  report.chi_square = chi.statistic;
  report.chi_square_dof = chi.dof;
  report.chi_square_p = chi.p_value;

  report.mean_w1 = w1_total / reps;
  report.mean_moved_mass = moved_total / reps;
  const boost::math::poisson_distribution<double> poisson(static_cast<double>(m));
  report.poisson_mass = boost::math::pdf(poisson, static_cast<double>(m));
  report.exact_sum_frequency = static_cast<double>(exact_sum) / reps;
  report.exact_sum_stderr = std::sqrt(report.poisson_mass * (1.0 - report.poisson_mass) / reps);
  report.exact_sum_z = report.exact_sum_stderr > 0.0
                           ? (report.exact_sum_frequency - report.poisson_mass) / report.exact_sum_stderr
                           : 0.0;
  return report;
}

}  // namespace ldboot::cli
