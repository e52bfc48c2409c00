#include "ldboot/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

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

// Softmax weights of alpha * grid + log mass, returned with the log-sum-exp.
double tilted_weights(const TabulatedLaw& law, double alpha, std::vector<double>& w) {
  w.resize(law.grid.size());
  double peak = -kInf;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = alpha * law.grid[i] + std::log(law.mass[i]);
    peak = std::max(peak, w[i]);
  }
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : w) v /= total;
  return peak + std::log(total);
}

}  // namespace

CgfSpec CgfSpec::scaled_poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("scaled_poisson: lambda must be positive");
  }
  return CgfSpec(ScaledPoissonLaw{lambda});
}

CgfSpec CgfSpec::binomial(int K) {
  if (K < 2) throw DomainError("binomial: K must be at least 2");
  return CgfSpec(BinomialLaw{K});
}

CgfSpec CgfSpec::tabulated(std::vector<double> grid, std::vector<double> mass) {
  if (grid.size() != mass.size() || grid.empty()) {
    throw DimensionError("tabulated: grid and mass must be nonempty and equal length");
  }
  TabulatedLaw law;
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
      throw DomainError("tabulated: grid points must lie in [0, inf)");
    }
    if (!(mass[i] >= 0.0) || !std::isfinite(mass[i])) {
      throw DomainError("tabulated: masses must be nonnegative");
    }
    if (mass[i] == 0.0) continue;
    law.grid.push_back(grid[i]);
    law.mass.push_back(mass[i]);
    total += mass[i];
  }
  if (!(total > 0.0)) throw DomainError("tabulated: total mass is zero");
  for (double& m : law.mass) m /= total;
  return CgfSpec(std::move(law));
}

double CgfSpec::value(double alpha) const {
  return std::visit(
      overloaded{
          [&](const ScaledPoissonLaw& p) { return cgf_scaled_poisson(p.lambda, alpha); },
          [&](const BinomialLaw& b) {
            const double K = b.K;
            if (alpha > 0.0) {
              return K * (alpha + std::log1p((K - 1.0) * std::exp(-alpha)) - std::log(K));
            }
            return K * (std::log(K - 1.0) + std::log1p(std::exp(alpha) / (K - 1.0)) -
                        std::log(K));
          },
          [&](const TabulatedLaw& t) {
            std::vector<double> w;
            return tilted_weights(t, alpha, w);
          },
      },
      kind_);
}

double CgfSpec::derivative(double alpha) const {
  return std::visit(
      overloaded{
          [&](const ScaledPoissonLaw& p) { return std::exp(alpha / p.lambda); },
          [&](const BinomialLaw& b) {
            const double K = b.K;
            return K / (1.0 + (K - 1.0) * std::exp(-alpha));
          },
          [&](const TabulatedLaw& t) {
            std::vector<double> w;
            tilted_weights(t, alpha, w);
            double m = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * t.grid[i];
            return m;
          },
      },
      kind_);
}

double CgfSpec::second_derivative(double alpha) const {
  return std::visit(
      overloaded{
          [&](const ScaledPoissonLaw& p) { return std::exp(alpha / p.lambda) / p.lambda; },
          [&](const BinomialLaw& b) {
            const double K = b.K;
            const double q = 1.0 / (1.0 + (K - 1.0) * std::exp(-alpha));
            return K * q * (1.0 - q);
          },
          [&](const TabulatedLaw& t) {
            std::vector<double> w;
            tilted_weights(t, alpha, w);
            double m = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * t.grid[i];
            double v = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
              const double d = t.grid[i] - m;
              v += w[i] * d * d;
            }
            return v;
          },
      },
      kind_);
}

SupportHull CgfSpec::hull() const {
  return std::visit(
      overloaded{
          [](const ScaledPoissonLaw& p) {
            return SupportHull{0.0, kInf, std::exp(-p.lambda), 0.0};
          },
          [](const BinomialLaw& b) {
            const double K = b.K;
            return SupportHull{0.0, K, std::pow(1.0 - 1.0 / K, K), std::pow(1.0 / K, K)};
          },
          [](const TabulatedLaw& t) {
            SupportHull h{kInf, -kInf, 0.0, 0.0};
            for (std::size_t i = 0; i < t.grid.size(); ++i) {
              h.lower = std::min(h.lower, t.grid[i]);
              h.upper = std::max(h.upper, t.grid[i]);
            }
            for (std::size_t i = 0; i < t.grid.size(); ++i) {
              if (t.grid[i] == h.lower) h.lower_mass += t.mass[i];
              if (t.grid[i] == h.upper) h.upper_mass += t.mass[i];
            }
            return h;
          },
      },
      kind_);
}

std::string CgfSpec::name() const {
  return std::visit(
      overloaded{
          [](const ScaledPoissonLaw& p) {
            return "scaled_poisson(" + format_double(p.lambda) + ")";
          },
          [](const BinomialLaw& b) { return "binomial(" + std::to_string(b.K) + ")"; },
          [](const TabulatedLaw& t) {
            return "tabulated(" + std::to_string(t.grid.size()) + " atoms)";
          },
      },
      kind_);
}

double cgf_scaled_poisson(double lambda, double alpha) {
  if (!(lambda > 0.0)) throw DomainError("cgf_scaled_poisson: lambda must be positive");
  return lambda * std::expm1(alpha / lambda);
}

ExtendedReal legendre_scaled_poisson(double lambda, double x) {
  if (!(lambda > 0.0)) throw DomainError("legendre_scaled_poisson: lambda must be positive");
  if (x < 0.0) return ExtendedReal::infinity();
  if (x == 0.0) return ExtendedReal(lambda);
  return ExtendedReal(std::max(0.0, lambda - lambda * x + lambda * x * std::log(x)));
}

ExtendedReal legendre_binomial(int K, double x) {
  if (K < 2) throw DomainError("legendre_binomial: K must be at least 2");
  const double k = K;
  if (x < 0.0 || x > k) return ExtendedReal::infinity();
  const double left = x > 0.0 ? x * std::log(x) : 0.0;
  const double right = x < k ? (k - x) * std::log((k - x) / (k - 1.0)) : 0.0;
  return ExtendedReal(std::max(0.0, left + right));
}

LegendreResult legendre_numeric(const CgfSpec& cgf, double x, double tol) {
  if (!(tol > 0.0)) throw DomainError("legendre_numeric: tol must be positive");
  if (std::isnan(x)) throw DomainError("legendre_numeric: x is NaN");
  const SupportHull hull = cgf.hull();
  LegendreResult out;
  if (x < hull.lower || x > hull.upper) {
    out.value = ExtendedReal::infinity();
    out.attained = LegendreResult::Attained::outside;
    out.argmax_alpha = x < hull.lower ? -kInf : kInf;
    return out;
  }
  auto endpoint = [&](bool lower) {
    out.value = ExtendedReal(-std::log(lower ? hull.lower_mass : hull.upper_mass));
    out.attained = lower ? LegendreResult::Attained::lower_endpoint
                         : LegendreResult::Attained::upper_endpoint;
    out.argmax_alpha = lower ? -kInf : kInf;
    return out;
  };
  if (x == hull.lower) return endpoint(true);
  if (x == hull.upper) return endpoint(false);

  // Lambda' is strictly increasing on the open hull: bracket the root.
  constexpr double kAlphaCap = 1e12;
  auto residual = [&](double a) { return cgf.derivative(a) - x; };
  double lo = -1.0;
  double hi = 1.0;
  while (residual(lo) > 0.0) {
    hi = lo;
    lo *= 2.0;
    if (lo < -kAlphaCap) return endpoint(true);
  }
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kAlphaCap) return endpoint(false);
  }

  constexpr int kMaxIterations = 300;
  const double scale = std::max(1.0, std::abs(x));
  double alpha = std::clamp(0.0, lo, hi);
  if (alpha == lo || alpha == hi) alpha = 0.5 * (lo + hi);
  int it = 0;
  bool converged = false;
  for (; it < kMaxIterations; ++it) {
    const double r = residual(alpha);
    if (std::abs(r) <= tol * scale) {
      converged = true;
      break;
    }
    if (r > 0.0) {
      hi = alpha;
    } else {
      lo = alpha;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(alpha))) {
      converged = true;
      break;
    }
    const double curvature = cgf.second_derivative(alpha);
    double next = curvature > 0.0 ? alpha - r / curvature : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    alpha = next;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "legendre_numeric: no convergence for " << cgf.name() << " at x = "
        << format_double(x) << " after " << it << " iterations (bracket ["
        << format_double(lo) << ", " << format_double(hi) << "])";
    throw NumericError(msg.str());
  }
  out.argmax_alpha = alpha;
  out.iterations = it;
  out.value = ExtendedReal(std::max(0.0, alpha * x - cgf.value(alpha)));
  return out;
}

std::optional<LegendreFn> closed_form_legendre(const CgfSpec& cgf) {
  return std::visit(
      overloaded{
          [](const ScaledPoissonLaw& p) -> std::optional<LegendreFn> {
            const double lambda = p.lambda;
            return LegendreFn([lambda](double x) { return legendre_scaled_poisson(lambda, x); });
          },
          [](const BinomialLaw& b) -> std::optional<LegendreFn> {
            const int K = b.K;
            return LegendreFn([K](double x) { return legendre_binomial(K, x); });
          },
          [](const TabulatedLaw&) -> std::optional<LegendreFn> { return std::nullopt; },
      },
      cgf.kind());
}

LegendreFn legendre_evaluator(const CgfSpec& cgf, double tol) {
  if (auto closed = closed_form_legendre(cgf)) return *closed;
  return [cgf, tol](double x) { return legendre_numeric(cgf, x, tol).value; };
}

GargamelReport gargamel_condition(const CgfSpec& cgf, double probe_alpha) {
  if (!(probe_alpha > 0.0)) throw DomainError("gargamel_condition: probe must be positive");
  GargamelReport report;
  for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
    const double a = probe_alpha * scale;
    report.probes.push_back(a);
    report.left_values.push_back(cgf.derivative(-a));
    report.right_values.push_back(cgf.derivative(a));
  }
  report.left_limit_estimate = report.left_values.back();
  const SupportHull hull = cgf.hull();
  report.right_unbounded = std::isinf(hull.upper);
  report.right_bound = report.right_unbounded ? kInf : hull.upper;
  return report;
}

}  // namespace ldboot
