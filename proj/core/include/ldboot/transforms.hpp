#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldboot/extended.hpp"

namespace ldboot {

/// Law of Y with lambda * Y ~ Poisson(lambda); mean one.
struct ScaledPoissonLaw {
  double lambda = 1.0;
};

/// Binomial(K, 1/K); mean one, support {0, ..., K}.
struct BinomialLaw {
  int K = 2;
};

/// Finite weight law: masses (normalized at construction) on a grid of
/// nonnegative points.
struct TabulatedLaw {
  std::vector<double> grid;
  std::vector<double> mass;
};

/// Closed interval spanned by the support, and the masses of its endpoints.
/// `upper` is +inf for unbounded support.
struct SupportHull {
  double lower = 0.0;
  double upper = 0.0;
  double lower_mass = 0.0;
  double upper_mass = 0.0;
};

/// Cumulant generating function alpha -> log E exp(alpha Y) of a weight law
/// with all exponential moments finite.
class CgfSpec {
 public:
  using Kind = std::variant<ScaledPoissonLaw, BinomialLaw, TabulatedLaw>;

  static CgfSpec scaled_poisson(double lambda);
  static CgfSpec binomial(int K);
  /// Drops zero-mass entries and normalizes; the grid must be nonnegative.
  static CgfSpec tabulated(std::vector<double> grid, std::vector<double> mass);

  [[nodiscard]] double value(double alpha) const;
  [[nodiscard]] double derivative(double alpha) const;
  [[nodiscard]] double second_derivative(double alpha) const;
  [[nodiscard]] SupportHull hull() const;
  [[nodiscard]] double mean() const { return derivative(0.0); }

  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] std::string name() const;

 private:
  explicit CgfSpec(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Evaluator x -> Lambda*(x).
using LegendreFn = std::function<ExtendedReal(double)>;

/// lambda (e^{alpha/lambda} - 1).
double cgf_scaled_poisson(double lambda, double alpha);

/// lambda - lambda x + lambda x ln x for x >= 0 (lambda at x = 0), +inf for
/// x < 0.
ExtendedReal legendre_scaled_poisson(double lambda, double x);

/// x ln x + (K - x) ln((K - x)/(K - 1)) on [0, K], +inf outside.
ExtendedReal legendre_binomial(int K, double x);

struct LegendreResult {
  enum class Attained { interior, lower_endpoint, upper_endpoint, outside };
  ExtendedReal value;
  /// Maximizing alpha for interior points; +-inf at endpoints / outside.
  double argmax_alpha = 0.0;
  Attained attained = Attained::interior;
  int iterations = 0;
};

/// sup_alpha { alpha x - Lambda(alpha) } by a safeguarded Newton solve of
/// Lambda'(alpha) = x. Endpoints of the support hull take their limit value
/// -ln xi({endpoint}); points outside the hull give +inf.
LegendreResult legendre_numeric(const CgfSpec& cgf, double x, double tol = 1e-12);

/// Closed form for the built-in laws, nullopt for tabulated ones.
std::optional<LegendreFn> closed_form_legendre(const CgfSpec& cgf);

/// Closed form when available, numeric otherwise.
LegendreFn legendre_evaluator(const CgfSpec& cgf, double tol = 1e-12);

/// Numerical proxy for: Lambda'(alpha) -> 0 as alpha -> -inf and
/// Lambda'(alpha) -> +inf as alpha -> +inf.
struct GargamelReport {
  double left_limit_estimate = 0.0;  ///< Lambda'(-largest probe)
  bool right_unbounded = false;
  double right_bound = 0.0;          ///< sup of Lambda' when bounded
  std::vector<double> probes;        ///< |alpha| values used
  std::vector<double> left_values;   ///< Lambda'(-probe)
  std::vector<double> right_values;  ///< Lambda'(+probe), may be +inf
  [[nodiscard]] bool satisfied() const {
    return right_unbounded && left_limit_estimate <= 1e-9;
  }
};

GargamelReport gargamel_condition(const CgfSpec& cgf, double probe_alpha);

}  // namespace ldboot
