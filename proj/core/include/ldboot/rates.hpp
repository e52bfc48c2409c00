#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldboot/extended.hpp"
#include "ldboot/measures.hpp"
#include "ldboot/samplers.hpp"
#include "ldboot/transforms.hpp"

namespace ldboot {

// ---------------------------------------------------------------------------
// Rate functions on the simplex (I^W, I^X)

struct EntropyTo {
  FiniteMeasure reference;
};
/// Zero at `point` (TV <= 1e-9), +inf elsewhere.
struct IndicatorAt {
  FiniteMeasure point;
};
struct ScaledEntropy {
  double lambda = 1.0;
  FiniteMeasure reference;
};
/// Values tabulated on simplex points; evaluation returns the value at the
/// TV-nearest point (first one on ties).
struct TabulatedRate {
  std::vector<FiniteMeasure> points;
  std::vector<ExtendedReal> values;
};

using RateFunctionSpec = std::variant<EntropyTo, IndicatorAt, ScaledEntropy, TabulatedRate>;

ExtendedReal evaluate(const RateFunctionSpec& rate, const FiniteMeasure& zeta);

/// (nu, zeta) -> K(nu; zeta), the conditional rate at observation law zeta.
using ConditionalRateFn =
    std::function<ExtendedReal(const FiniteMeasure& nu, const FiniteMeasure& zeta)>;

// ---------------------------------------------------------------------------
// Closed forms

/// lambda * H(nu | mu).
ExtendedReal rate_efron(const FiniteMeasure& nu, const FiniteMeasure& mu, double lambda);

/// sum over mu_i > 0 of mu_i Lambda*(nu_i / mu_i); +inf if nu_i > 0 = mu_i.
ExtendedReal rate_kullback_bound(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                 const LegendreFn& legendre);

/// Kullback bound with the Binomial(K, 1/K) transform.
ExtendedReal rate_hypergeometric_bound(const FiniteMeasure& nu, const FiniteMeasure& mu, int K);

struct IidWeightedRate {
  ExtendedReal value;
  double argmin_m = 1.0;  ///< meaningless when value is infinite
};

/// inf_{m > 0} sum_i mu_i Lambda*(m nu_i / mu_i). The objective is convex
/// in m: golden-section search on a bracket grown geometrically from m = 1
/// (or from the best point of a log-grid scan when m = 1 is infeasible).
IidWeightedRate rate_iid_weighted(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                  const LegendreFn& legendre, double tol = 1e-10);

/// chi = (mu - (1 - alpha) nu) / alpha with negatives down to -1e-12 clamped,
/// or nullopt when chi is not a probability vector. Requires alpha > 0.
std::optional<FiniteMeasure> jackknife_chi(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                           double alpha);

/// (1 - alpha) H(nu|mu) + alpha H(chi|mu); for alpha = 0 the indicator of
/// nu = mu.
ExtendedReal rate_jackknife(const FiniteMeasure& nu, const FiniteMeasure& mu, double alpha);

// ---------------------------------------------------------------------------
// Kernel optimization oracles

struct ConditionalRateResult {
  ExtendedReal value;
  std::optional<Kernel> optimal_kernel;
  int iterations = 0;
  double dual_gap = 0.0;
  double max_residual = 0.0;
};

/// mu^{(x) k} on the s^k cells, indexed lexicographically with the first
/// coordinate most significant.
FiniteMeasure product_measure(const FiniteMeasure& mu, int k);

struct KBlocksRate {
  ExtendedReal value;
  std::optional<FiniteMeasure> optimal_joint;
  double dual_gap = 0.0;
  int iterations = 0;
};

/// inf (1/k) H(nu_k | mu_k) over joints on alphabet^k whose averaged
/// coordinate marginals equal nu. Infeasibility is detected through dual
/// divergence and reported as +inf. Throws NumericError on non-convergence.
KBlocksRate rate_k_blocks(const FiniteMeasure& nu, const FiniteMeasure& mu_k, int k,
                          double tol = 1e-13);

/// min sum_x mu_x H(rho_x | xi) subject to sum_w w rho_x(w) = nu_x / mu_x,
/// solved per symbol by exponential tilting of xi.
ConditionalRateResult rate_conditional_general(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                               const TabulatedLaw& xi, double tol = 1e-13);

/// Same objective with the weight marginal pinned to rho1 (on `grid`):
/// min H(rho | rho1 (x) mu) over joints with first marginal rho1, second
/// marginal mu and sum_w w rho(w, x) = nu_x. Used for weight schemes whose
/// weight empirical measure is deterministic.
ConditionalRateResult rate_pinned_weight_law(const FiniteMeasure& nu, const FiniteMeasure& mu,
                                             const std::vector<double>& grid,
                                             const std::vector<double>& rho1,
                                             double tol = 1e-13);

/// Q(lambda) restricted to {0, 1/lambda, ..., G/lambda} and renormalized.
/// G is the smallest integer for which both the Poisson(lambda) and the
/// Poisson(lambda * max_ratio) upper tails beyond G are below tail_tol; the
/// second tail bounds the truncation seen by a kernel tilted to mean
/// max_ratio.
TabulatedLaw discretize_scaled_poisson(double lambda, double tail_tol = 1e-10,
                                       double max_ratio = 1.0);

/// Conditional-rate evaluator for a weight scheme:
///   m_out_of_n     lambda H
///   iid_weighted   inf over m of the Kullback form
///   hypergeometric Kullback lower bound with Binomial(K, 1/K)
///   delete_h       jackknife closed form
///   deterministic  pinned weight law (template empirical measure)
///   k_blocks       k-blocks program with zeta^{(x) k}
ConditionalRateFn conditional_rate_for(const SchemeConfig& scheme);

/// True when the evaluator for this scheme is only a lower bound.
bool is_lower_bound(const SchemeConfig& scheme);

// ---------------------------------------------------------------------------
// Unconditional rate

struct UnconditionalRate {
  ExtendedReal value;
  FiniteMeasure argmin;
  int evaluations = 0;
};

/// inf_zeta K(nu; zeta) + I^X(zeta) by a mesh-0.02 simplex grid followed by
/// pattern search (pairwise mass transfers, halving the step down to tol)
/// from the best grid points and from zeta = nu. Ties go to the
/// lexicographically smallest argmin. Alphabets of size <= 4.
UnconditionalRate rate_unconditional(const FiniteMeasure& nu, const RateFunctionSpec& ix,
                                     const ConditionalRateFn& conditional, double tol = 1e-9);

/// inf over zeta = (1 - alpha) nu + alpha chi, chi in the simplex, of
/// (1 - alpha) H(nu|zeta) + alpha H(chi|zeta) + I^X(zeta). alpha = 0 gives
/// I^X(nu).
UnconditionalRate rate_jackknife_unconditional(const FiniteMeasure& nu,
                                               const RateFunctionSpec& ix, double alpha,
                                               double tol = 1e-9);

// ---------------------------------------------------------------------------
// Diagnostics

struct SmoothingReport {
  ExtendedReal unconditional;
  ExtendedReal ix_at_nu;
  double gap = 0.0;  ///< ix_at_nu - unconditional, +inf if only the right side is infinite
  bool holds = false;
};

SmoothingReport smoothing_inequality_check(const FiniteMeasure& nu, const RateFunctionSpec& ix,
                                           const ConditionalRateFn& conditional,
                                           double tol = 1e-9);

struct ProbePair {
  FiniteMeasure nu;
  FiniteMeasure zeta;
};

struct EfficiencyVerdict {
  bool degenerate = false;
  std::vector<ExtendedReal> values;
};

/// "degenerate" when K(nu; zeta) is 0 for nu = zeta (TV <= tol) and above
/// the proxy infinity 1/tol on every other probe.
EfficiencyVerdict efficiency_condition_check(const ConditionalRateFn& conditional,
                                             const std::vector<ProbePair>& probes,
                                             double tol = 1e-9);

}  // namespace ldboot
