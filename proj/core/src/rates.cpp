#include "ldboot/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ldboot/entropy_projection.hpp"
#include "ldboot/errors.hpp"
#include "ldboot/format.hpp"

namespace ldboot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_pair(const FiniteMeasure& nu, const FiniteMeasure& mu, const char* where) {
  if (nu.alphabet_size() != mu.alphabet_size()) {
    throw DimensionError(std::string(where) + ": alphabet sizes differ (" +
                         std::to_string(nu.alphabet_size()) + " vs " +
                         std::to_string(mu.alphabet_size()) + ")");
  }
  if (!nu.is_probability() || !mu.is_probability()) {
    throw DomainError(std::string(where) + ": arguments must be probability vectors");
  }
}

// Sum over cells of p ln(p/q) for probability vectors, p << q assumed.
double entropy_of(std::span<const double> p, std::span<const double> q) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, h);
}

// ---------------------------------------------------------------------------
// Simplex search shared by the unconditional rates.

using Point = std::vector<double>;
using Objective = std::function<double(const Point&)>;

struct Candidate {
  double value = kInf;
  Point point;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.point < b.point;
}

void enumerate_grid(std::size_t s, int steps, Point& current, std::size_t index, int remaining,
                    const std::function<void(const Point&)>& visit) {
  if (index + 1 == s) {
    current[index] = static_cast<double>(remaining) / steps;
    visit(current);
    return;
  }
  for (int j = 0; j <= remaining; ++j) {
    current[index] = static_cast<double>(j) / steps;
    enumerate_grid(s, steps, current, index + 1, remaining - j, visit);
  }
}

Candidate refine(Candidate start, const Objective& f, double mesh, double tol, int& evaluations) {
  const std::size_t s = start.point.size();
  constexpr int kMaxMovesPerLevel = 100000;
  for (double delta = mesh; delta >= tol; delta *= 0.5) {
    for (int move = 0; move < kMaxMovesPerLevel; ++move) {
      Candidate best = start;
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
          if (i == j) continue;
          const double d = std::min(delta, start.point[j]);
          if (!(d > 0.0)) continue;
          Candidate trial{0.0, start.point};
          trial.point[i] += d;
          trial.point[j] = d == start.point[j] ? 0.0 : trial.point[j] - d;
          trial.value = f(trial.point);
          ++evaluations;
          if (trial.value < best.value) best = std::move(trial);
        }
      }
      if (!(best.value < start.value)) break;
      start = std::move(best);
    }
  }
  return start;
}

Candidate simplex_search(std::size_t s, const Objective& f, const std::vector<Point>& extra_starts,
                         double tol, int& evaluations) {
  if (s > 4) {
    throw UnsupportedError("simplex search supports alphabets of size <= 4, got " +
                           std::to_string(s));
  }
  if (!(tol > 0.0)) throw DomainError("simplex search: tol must be positive");
  constexpr int kSteps = 50;  // mesh 0.02
  constexpr std::size_t kStarts = 5;
  std::vector<Candidate> grid;
  Point scratch(s, 0.0);
  enumerate_grid(s, kSteps, scratch, 0, kSteps, [&](const Point& p) {
    const double v = f(p);
    ++evaluations;
    if (std::isfinite(v)) grid.push_back({v, p});
  });
  std::sort(grid.begin(), grid.end(), better);
  if (grid.size() > kStarts) grid.resize(kStarts);
  for (const Point& p : extra_starts) {
    const double v = f(p);
    ++evaluations;
    if (std::isfinite(v)) grid.push_back({v, p});
  }
  Candidate best;
  for (const Candidate& start : grid) {
    Candidate c = refine(start, f, 1.0 / kSteps, tol, evaluations);
    if (best.point.empty() || better(c, best)) best = std::move(c);
  }
  return best;
}

double poisson_upper_tail(double mean, int G) {
  // sum_{k > G} e^{-mean} mean^k / k!
  double k = G + 1.0;
  double term = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
  double sum = 0.0;
  while (term > 0.0) {
    sum += term;
    term *= mean / (k + 1.0);
    k += 1.0;
    if (k > mean && term < 1e-20 * sum) break;
  }
  return sum;
}

}  // namespace

ExtendedReal evaluate(const RateFunctionSpec& rate, const FiniteMeasure& zeta) {
  return std::visit(
      overloaded{
          [&](const EntropyTo& r) { return relative_entropy(zeta, r.reference); },
          [&](const IndicatorAt& r) {
            if (zeta.alphabet_size() != r.point.alphabet_size()) {
              throw DimensionError("indicator_at: alphabet sizes differ");
            }
            return tv_distance(zeta, r.point) <= 1e-9 ? ExtendedReal(0.0)
                                                      : ExtendedReal::infinity();
          },
          [&](const ScaledEntropy& r) {
            if (!(r.lambda > 0.0)) throw DomainError("scaled_entropy: lambda must be positive");
            return r.lambda * relative_entropy(zeta, r.reference);
          },
          [&](const TabulatedRate& r) {
            if (r.points.empty() || r.points.size() != r.values.size()) {
              throw DomainError("tabulated rate: points and values must be nonempty, equal length");
            }
            std::size_t best = 0;
            double best_d = kInf;
            for (std::size_t i = 0; i < r.points.size(); ++i) {
              const double d = tv_distance(zeta, r.points[i]);
              if (d < best_d) {
                best_d = d;
                best = i;
              }
            }
            return r.values[best];
          },
      },
      rate);
}

ExtendedReal rate_efron(const FiniteMeasure& nu, const FiniteMeasure& mu, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("rate_efron: lambda must be positive");
  }
  require_pair(nu, mu, "rate_efron");
  return lambda * relative_entropy(nu, mu);
}

ExtendedReal rate_kullback_bound(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                 const LegendreFn& legendre) {
  require_pair(nu, mu, "rate_kullback_bound");
  ExtendedReal total(0.0);
  for (std::size_t i = 0; i < nu.alphabet_size(); ++i) {
    if (mu[i] > 0.0) {
      total += mu[i] * legendre(nu[i] / mu[i]);
    } else if (nu[i] > 0.0) {
      return ExtendedReal::infinity();
    }
  }
  return total;
}

ExtendedReal rate_hypergeometric_bound(const FiniteMeasure& nu, const FiniteMeasure& mu, int K) {
  if (K < 2) throw DomainError("rate_hypergeometric_bound: K must be at least 2");
  return rate_kullback_bound(nu, mu, [K](double x) { return legendre_binomial(K, x); });
}

IidWeightedRate rate_iid_weighted(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                  const LegendreFn& legendre, double tol) {
  require_pair(nu, mu, "rate_iid_weighted");
  if (!(tol > 0.0)) throw DomainError("rate_iid_weighted: tol must be positive");
  for (std::size_t i = 0; i < nu.alphabet_size(); ++i) {
    if (mu[i] == 0.0 && nu[i] > 0.0) return {ExtendedReal::infinity(), 1.0};
  }
  auto g = [&](double m) {
    ExtendedReal total(0.0);
    for (std::size_t i = 0; i < nu.alphabet_size(); ++i) {
      if (mu[i] > 0.0) total += mu[i] * legendre(m * nu[i] / mu[i]);
    }
    return total.value();
  };

  double m0 = 1.0;
  double f0 = g(m0);
  if (!std::isfinite(f0)) {
    constexpr int kScan = 240;
    for (int j = 0; j <= kScan; ++j) {
      const double m = std::pow(10.0, -6.0 + 12.0 * j / kScan);
      const double v = g(m);
      if (v < f0) {
        f0 = v;
        m0 = m;
      }
    }
    if (!std::isfinite(f0)) return {ExtendedReal::infinity(), 1.0};
  }

  constexpr double kLowCap = 1e-12;
  constexpr double kHighCap = 1e12;
  double a = m0 / 2.0;
  double b = m0 * 2.0;
  double fa = g(a);
  double fb = g(b);
  while (fa < f0) {
    b = m0;
    fb = f0;
    m0 = a;
    f0 = fa;
    a = m0 / 2.0;
    if (a < kLowCap) {
      throw NumericError("rate_iid_weighted: no bracket, objective still decreasing at m = " +
                         format_double(a));
    }
    fa = g(a);
  }
  while (fb < f0) {
    a = m0;
    fa = f0;
    m0 = b;
    f0 = fb;
    b = m0 * 2.0;
    if (b > kHighCap) {
      throw NumericError("rate_iid_weighted: no bracket, objective still decreasing at m = " +
                         format_double(b));
    }
    fb = g(b);
  }

  // Golden-section on [a, b]; the minimum of a convex g lies in the bracket.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  double best_m = m0;
  double best_f = f0;
  while (b - a > tol * std::max(1.0, std::abs(a))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = g(x2);
    }
    if (f1 < best_f) {
      best_f = f1;
      best_m = x1;
    }
    if (f2 < best_f) {
      best_f = f2;
      best_m = x2;
    }
  }
  return {ExtendedReal(std::max(0.0, best_f)), best_m};
}

std::optional<FiniteMeasure> jackknife_chi(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                           double alpha) {
  require_pair(nu, mu, "jackknife_chi");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("jackknife_chi: alpha must lie in (0, 1)");
  std::vector<double> chi(nu.alphabet_size());
  for (std::size_t i = 0; i < chi.size(); ++i) {
    chi[i] = (mu[i] - (1.0 - alpha) * nu[i]) / alpha;
    if (chi[i] < -1e-12) return std::nullopt;
    chi[i] = std::max(0.0, chi[i]);
  }
  return FiniteMeasure(std::move(chi));
}

ExtendedReal rate_jackknife(const FiniteMeasure& nu, const FiniteMeasure& mu, double alpha) {
  require_pair(nu, mu, "rate_jackknife");
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw DomainError("rate_jackknife: alpha must lie in [0, 1)");
  }
  if (alpha == 0.0) {
    return tv_distance(nu, mu) <= 1e-9 ? ExtendedReal(0.0) : ExtendedReal::infinity();
  }
  const auto chi = jackknife_chi(nu, mu, alpha);
  if (!chi) return ExtendedReal::infinity();
  return (1.0 - alpha) * relative_entropy(nu, mu) + alpha * relative_entropy(*chi, mu);
}

FiniteMeasure product_measure(const FiniteMeasure& mu, int k) {
  if (k < 1) throw DomainError("product_measure: k must be at least 1");
  const std::size_t s = mu.alphabet_size();
  double cells = std::pow(static_cast<double>(s), k);
  if (cells > 1e7) throw UnsupportedError("product_measure: s^k exceeds 1e7 cells");
  std::vector<double> out{1.0};
  for (int j = 0; j < k; ++j) {
    std::vector<double> next;
    next.reserve(out.size() * s);
    for (double prefix : out) {
      for (std::size_t x = 0; x < s; ++x) next.push_back(prefix * mu[x]);
    }
    out = std::move(next);
  }
  return FiniteMeasure(std::move(out));
}

KBlocksRate rate_k_blocks(const FiniteMeasure& nu, const FiniteMeasure& mu_k, int k, double tol) {
  if (k < 1) throw DomainError("rate_k_blocks: k must be at least 1");
  const std::size_t s = nu.alphabet_size();
  const double cells_d = std::pow(static_cast<double>(s), k);
  if (static_cast<double>(mu_k.alphabet_size()) != cells_d) {
    throw DimensionError("rate_k_blocks: mu_k has " + std::to_string(mu_k.alphabet_size()) +
                         " cells, expected s^k = " + format_double(cells_d));
  }
  if (!nu.is_probability() || !mu_k.is_probability()) {
    throw DomainError("rate_k_blocks: arguments must be probability vectors");
  }
  KBlocksRate out;
  if (k == 1) {
    out.value = relative_entropy(nu, mu_k);
    if (out.value.is_finite()) out.optimal_joint = nu;
    return out;
  }

  const std::size_t cells = mu_k.alphabet_size();
  EntropyProjectionProblem problem;
  problem.reference = mu_k.values();
  problem.constraints.assign(s + 1, std::vector<double>(cells, 0.0));
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rest = c;
    for (int j = 0; j < k; ++j) {
      problem.constraints[rest % s][c] += 1.0 / k;
      rest /= s;
    }
    problem.constraints[s][c] = 1.0;
  }
  problem.targets = nu.values();
  problem.targets.push_back(1.0);

  EntropyProjectionOptions options;
  options.gradient_tol = tol;
  const auto solved = project_entropy(problem, options);
  out.iterations = solved.iterations;
  if (solved.status == EntropyProjectionResult::Status::infeasible) {
    out.value = ExtendedReal::infinity();
    return out;
  }
  out.value = ExtendedReal(std::max(0.0, solved.relative_entropy / k));
  out.dual_gap = solved.dual_gap / k;
  out.optimal_joint = FiniteMeasure(solved.solution);
  return out;
}

ConditionalRateResult rate_conditional_general(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                               const TabulatedLaw& xi, double tol) {
  require_pair(nu, mu, "rate_conditional_general");
  const CgfSpec cgf = CgfSpec::tabulated(xi.grid, xi.mass);
  const auto& law = std::get<TabulatedLaw>(cgf.kind());
  const SupportHull hull = cgf.hull();

  ConditionalRateResult out;
  std::vector<FiniteMeasure> slices;
  ExtendedReal total(0.0);
  for (std::size_t x = 0; x < nu.alphabet_size(); ++x) {
    if (mu[x] == 0.0) {
      if (nu[x] > 0.0) {
        out.value = ExtendedReal::infinity();
        return out;
      }
      slices.emplace_back(law.mass);
      continue;
    }
    const double t = nu[x] / mu[x];
    const double slack = 1e-12 * std::max(1.0, std::abs(t));
    if (t < hull.lower - slack || t > hull.upper + slack) {
      out.value = ExtendedReal::infinity();
      return out;
    }
    std::vector<double> rho(law.grid.size(), 0.0);
    auto endpoint = [&](double where, double where_mass) {
      for (std::size_t j = 0; j < rho.size(); ++j) {
        if (law.grid[j] == where) rho[j] = law.mass[j] / where_mass;
      }
    };
    if (std::abs(t - hull.lower) <= slack) {
      endpoint(hull.lower, hull.lower_mass);
    } else if (std::abs(t - hull.upper) <= slack) {
      endpoint(hull.upper, hull.upper_mass);
    } else {
      const LegendreResult tilt = legendre_numeric(cgf, t, tol);
      ++out.iterations;
      out.iterations += tilt.iterations;
      if (tilt.attained == LegendreResult::Attained::lower_endpoint) {
        endpoint(hull.lower, hull.lower_mass);
      } else if (tilt.attained == LegendreResult::Attained::upper_endpoint) {
        endpoint(hull.upper, hull.upper_mass);
      } else {
        const double beta = tilt.argmax_alpha;
        double peak = -kInf;
        for (std::size_t j = 0; j < rho.size(); ++j) {
          rho[j] = beta * law.grid[j] + std::log(law.mass[j]);
          peak = std::max(peak, rho[j]);
        }
        double z = 0.0;
        for (double& v : rho) {
          v = std::exp(v - peak);
          z += v;
        }
        for (double& v : rho) v /= z;
      }
    }
    double residual = -t;
    for (std::size_t j = 0; j < rho.size(); ++j) residual += rho[j] * law.grid[j];
    out.max_residual = std::max(out.max_residual, std::abs(residual));
    total += mu[x] * ExtendedReal(entropy_of(rho, law.mass));
    slices.emplace_back(std::move(rho));
  }
  out.value = total;
  out.optimal_kernel = Kernel(law.grid, std::move(slices));
  return out;
}

ConditionalRateResult rate_pinned_weight_law(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                             const std::vector<double>& grid,
                                             const std::vector<double>& rho1, double tol) {
  require_pair(nu, mu, "rate_pinned_weight_law");
  if (grid.empty() || grid.size() != rho1.size()) {
    throw DimensionError("rate_pinned_weight_law: grid and rho1 must be nonempty, equal length");
  }
  const FiniteMeasure first(rho1);
  if (!first.is_probability()) {
    throw DomainError("rate_pinned_weight_law: rho1 must be a probability vector");
  }
  for (double w : grid) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("rate_pinned_weight_law: grid points must be nonnegative");
    }
  }
  const std::size_t r = grid.size();
  const std::size_t s = nu.alphabet_size();
  const std::size_t cells = r * s;

  EntropyProjectionProblem problem;
  problem.reference.resize(cells);
  for (std::size_t w = 0; w < r; ++w) {
    for (std::size_t x = 0; x < s; ++x) problem.reference[w * s + x] = rho1[w] * mu[x];
  }
  for (std::size_t w = 0; w < r; ++w) {
    std::vector<double> row(cells, 0.0);
    for (std::size_t x = 0; x < s; ++x) row[w * s + x] = 1.0;
    problem.constraints.push_back(std::move(row));
    problem.targets.push_back(rho1[w]);
  }
  for (std::size_t x = 0; x < s; ++x) {
    std::vector<double> marginal(cells, 0.0);
    std::vector<double> moment(cells, 0.0);
    for (std::size_t w = 0; w < r; ++w) {
      marginal[w * s + x] = 1.0;
      moment[w * s + x] = grid[w];
    }
    problem.constraints.push_back(std::move(marginal));
    problem.targets.push_back(mu[x]);
    problem.constraints.push_back(std::move(moment));
    problem.targets.push_back(nu[x]);
  }

  EntropyProjectionOptions options;
  options.gradient_tol = tol;
  const auto solved = project_entropy(problem, options);
  ConditionalRateResult out;
  out.iterations = solved.iterations;
  if (solved.status == EntropyProjectionResult::Status::infeasible) {
    out.value = ExtendedReal::infinity();
    return out;
  }
  out.value = ExtendedReal(std::max(0.0, solved.relative_entropy));
  out.dual_gap = solved.dual_gap;
  out.max_residual = solved.max_residual;
  std::vector<FiniteMeasure> slices;
  for (std::size_t x = 0; x < s; ++x) {
    if (mu[x] == 0.0) {
      slices.emplace_back(rho1);
      continue;
    }
    std::vector<double> slice(r);
    for (std::size_t w = 0; w < r; ++w) slice[w] = solved.solution[w * s + x] / mu[x];
    slices.emplace_back(std::move(slice));
  }
  out.optimal_kernel = Kernel(grid, std::move(slices));
  return out;
}

TabulatedLaw discretize_scaled_poisson(double lambda, double tail_tol, double max_ratio) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("discretize_scaled_poisson: lambda must be positive");
  }
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw DomainError("discretize_scaled_poisson: tail_tol must lie in (0, 1)");
  }
  if (!(max_ratio > 0.0) || !std::isfinite(max_ratio)) {
    throw DomainError("discretize_scaled_poisson: max_ratio must be positive");
  }
  const double far_mean = lambda * std::max(1.0, max_ratio);
  int G = static_cast<int>(std::floor(far_mean));
  while (poisson_upper_tail(lambda, G) >= tail_tol || poisson_upper_tail(far_mean, G) >= tail_tol) {
    ++G;
  }
  TabulatedLaw law;
  double total = 0.0;
  for (int k = 0; k <= G; ++k) {
    const double log_pmf = -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
    const double p = std::exp(log_pmf);
    if (!(p > 0.0)) {
      throw DomainError("discretize_scaled_poisson: mass at k = " + std::to_string(k) +
                        " underflows; max_ratio too large for lambda = " + format_double(lambda));
    }
    law.grid.push_back(k / lambda);
    law.mass.push_back(p);
    total += p;
  }
  for (double& m : law.mass) m /= total;
  return law;
}

ConditionalRateFn conditional_rate_for(const SchemeConfig& scheme) {
  validate(scheme);
  return std::visit(
      overloaded{
          [](const MOutOfN& s) -> ConditionalRateFn {
            return [lambda = s.lambda](const FiniteMeasure& nu, const FiniteMeasure& zeta) {
              return rate_efron(nu, zeta, lambda);
            };
          },
          [](const IidWeighted& s) -> ConditionalRateFn {
            const LegendreFn legendre = legendre_evaluator(CgfSpec::tabulated(s.grid, s.probs));
            return [legendre](const FiniteMeasure& nu, const FiniteMeasure& zeta) {
              return rate_iid_weighted(nu, zeta, legendre).value;
            };
          },
          [](const Hypergeometric& s) -> ConditionalRateFn {
            return [K = s.K](const FiniteMeasure& nu, const FiniteMeasure& zeta) {
              return rate_hypergeometric_bound(nu, zeta, K);
            };
          },
          [](const Deterministic& s) -> ConditionalRateFn {
            std::map<double, double> counts;
            for (double a : s.atoms) counts[a] += 1.0;
            std::vector<double> grid;
            std::vector<double> rho1;
            for (const auto& [atom, count] : counts) {
              grid.push_back(atom);
              rho1.push_back(count / static_cast<double>(s.atoms.size()));
            }
            return [grid, rho1](const FiniteMeasure& nu, const FiniteMeasure& zeta) {
              return rate_pinned_weight_law(nu, zeta, grid, rho1).value;
            };
          },
          [](const DeleteH& s) -> ConditionalRateFn {
            return [alpha = s.alpha](const FiniteMeasure& nu, const FiniteMeasure& zeta) {
              return rate_jackknife(nu, zeta, alpha);
            };
          },
          [](const KBlocks& s) -> ConditionalRateFn {
            return [k = s.k](const FiniteMeasure& nu, const FiniteMeasure& zeta) {
              return rate_k_blocks(nu, product_measure(zeta, k), k).value;
            };
          },
      },
      scheme);
}

bool is_lower_bound(const SchemeConfig& scheme) {
  return std::holds_alternative<Hypergeometric>(scheme);
}

UnconditionalRate rate_unconditional(const FiniteMeasure& nu, const RateFunctionSpec& ix,
                                     const ConditionalRateFn& conditional, double tol) {
  if (!nu.is_probability()) throw DomainError("rate_unconditional: nu must be a probability");
  UnconditionalRate out;
  if (const auto* indicator = std::get_if<IndicatorAt>(&ix)) {
    out.value = conditional(nu, indicator->point);
    out.argmin = indicator->point;
    out.evaluations = 1;
    return out;
  }
  const std::size_t s = nu.alphabet_size();
  const Objective f = [&](const Point& p) {
    const FiniteMeasure zeta(p);
    return (conditional(nu, zeta) + evaluate(ix, zeta)).value();
  };
  const Candidate best = simplex_search(s, f, {nu.values()}, tol, out.evaluations);
  if (best.point.empty()) {
    out.value = ExtendedReal::infinity();
    out.argmin = nu;
    return out;
  }
  out.value = ExtendedReal(best.value);
  out.argmin = FiniteMeasure(best.point);
  return out;
}

UnconditionalRate rate_jackknife_unconditional(const FiniteMeasure& nu,
                                               const RateFunctionSpec& ix, double alpha,
                                               double tol) {
  if (!nu.is_probability()) {
    throw DomainError("rate_jackknife_unconditional: nu must be a probability");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw DomainError("rate_jackknife_unconditional: alpha must lie in [0, 1)");
  }
  UnconditionalRate out;
  if (alpha == 0.0) {
    out.value = evaluate(ix, nu);
    out.argmin = nu;
    out.evaluations = 1;
    return out;
  }
  if (const auto* indicator = std::get_if<IndicatorAt>(&ix)) {
    out.value = rate_jackknife(nu, indicator->point, alpha);
    out.argmin = indicator->point;
    out.evaluations = 1;
    return out;
  }
  const std::size_t s = nu.alphabet_size();
  auto zeta_of = [&](const Point& chi) {
    Point zeta(s);
    for (std::size_t i = 0; i < s; ++i) zeta[i] = (1.0 - alpha) * nu[i] + alpha * chi[i];
    return zeta;
  };
  const Objective f = [&](const Point& chi) {
    const Point zp = zeta_of(chi);
    const FiniteMeasure zeta(zp);
    const double value = (1.0 - alpha) * entropy_of(nu.mass(), zp) + alpha * entropy_of(chi, zp);
    return (ExtendedReal(value) + evaluate(ix, zeta)).value();
  };
  const Candidate best = simplex_search(s, f, {nu.values()}, tol, out.evaluations);
  out.value = ExtendedReal(best.value);
  out.argmin = FiniteMeasure(zeta_of(best.point));
  return out;
}

SmoothingReport smoothing_inequality_check(const FiniteMeasure& nu, const RateFunctionSpec& ix,
                                           const ConditionalRateFn& conditional, double tol) {
  SmoothingReport report;
  report.unconditional = rate_unconditional(nu, ix, conditional, tol).value;
  report.ix_at_nu = evaluate(ix, nu);
  report.holds = report.unconditional <= report.ix_at_nu + ExtendedReal(tol);
  if (report.ix_at_nu.is_infinite()) {
    report.gap = report.unconditional.is_infinite() ? 0.0 : kInf;
  } else {
    report.gap = report.ix_at_nu.value() - report.unconditional.value();
  }
  return report;
}

EfficiencyVerdict efficiency_condition_check(const ConditionalRateFn& conditional,
                                             const std::vector<ProbePair>& probes, double tol) {
  if (!(tol > 0.0)) throw DomainError("efficiency_condition_check: tol must be positive");
  EfficiencyVerdict verdict;
  bool ok = !probes.empty();
  for (const ProbePair& probe : probes) {
    const ExtendedReal v = conditional(probe.nu, probe.zeta);
    verdict.values.push_back(v);
    if (tv_distance(probe.nu, probe.zeta) <= tol) {
      ok = ok && v.value() <= tol;
    } else {
      ok = ok && v.value() > 1.0 / tol;
    }
  }
  verdict.degenerate = ok;
  return verdict;
}

}  // namespace ldboot
