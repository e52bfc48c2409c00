#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ldboot/measures.hpp"
#include "ldboot/rates.hpp"
#include "ldboot/rng.hpp"
#include "ldboot/samplers.hpp"

namespace ldboot {

enum class ObservationKind { fixed_composition, iid };
enum class EstimatorKind { direct, tilted };
/// Normalization of -log p: by n, or by the resample size m(n).
enum class SpeedKind { n, m };

struct LdpExperiment {
  SchemeConfig scheme = MOutOfN{1.0};
  /// fixed_composition: x^n has empirical measure exactly `mu` (conditional
  /// LDP). iid: X_i iid from `mu`, drawn from a stream independent of the
  /// weights (unconditional LDP).
  ObservationKind observations = ObservationKind::fixed_composition;
  FiniteMeasure mu;
  FiniteMeasure target;
  double epsilon = 0.05;
  std::vector<std::int64_t> n_values;
  std::int64_t replications = 1000;
  EstimatorKind estimator = EstimatorKind::direct;
  SpeedKind speed = SpeedKind::n;
  std::uint64_t seed = 1;
  /// Number of largest n values entering the slope fit.
  int fit_points = 3;
  /// Pass threshold for |slope - ball infimum| / ball infimum.
  double relative_gap_threshold = 0.2;
};

/// Throws ConfigError on any violated invariant: epsilon in (0, 1), n_values
/// strictly increasing and >= alphabet size, replications >= 1000, tilting
/// and m-speed only for m_out_of_n, integral compositions.
void validate(const LdpExperiment& exp);

struct RatePoint {
  std::int64_t n = 0;
  double speed = 0.0;         ///< n, or m(n) under SpeedKind::m
  std::int64_t hits = 0;      ///< samples landing in the ball
  double p_hat = 0.0;
  double stderr_p = 0.0;
  double log_p = 0.0;         ///< -inf when no hit (missing)
  double log_p_stderr = 0.0;  ///< delta-method standard error of log p_hat
  bool missing = false;
};

struct RateEstimate {
  std::vector<RatePoint> points;
  bool fitted = false;
  double slope = 0.0;
  double slope_stderr = 0.0;
  /// Set when the fit could not be made; names the remedy.
  std::string advice;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

struct FitPoint {
  double x = 0.0;      ///< speed variable
  double log_p = 0.0;
  double weight = 1.0;  ///< inverse variance of log_p
};

/// Weighted least squares of -log p on x through an intercept. The slope
/// standard error is sqrt(1 / sum w (x - xbar_w)^2), exact when the weights
/// are true inverse variances. Throws ContractError with fewer than 3 finite
/// points.
SlopeFit fit_rate_slope(const std::vector<FitPoint>& points);

struct TiltedOutcome {
  double p_hat = 0.0;
  double stderr_p = 0.0;
  double log_p = 0.0;
  double log_p_stderr = 0.0;
  std::int64_t hits = 0;
};

/// Importance-sampling estimate of P(TV(L^n, nu) < epsilon) for the
/// m-out-of-n bootstrap on a fixed composition. Ball counts are drawn per
/// symbol from Multinomial(m, q) with q_s proportional to nu_s over the
/// symbols present (the cell tilt mu_j nu_s / mu_s aggregated by symbol),
/// or from `tilt` when given. Each sample is reweighted by prod (p_s/q_s)^N_s.
/// Throws DegenerateEstimatorError when q vanishes on a symbol with p > 0.
TiltedOutcome tilted_efron_estimator(std::int64_t n, std::int64_t m,
                                     const std::vector<std::int64_t>& composition,
                                     const FiniteMeasure& nu, double epsilon,
                                     std::int64_t replications, Rng& rng,
                                     const std::optional<FiniteMeasure>& tilt = std::nullopt);

/// Replications are cut into blocks of this size. Block b at n-index i draws
/// weights from Rng::stream(seed, 2i + 1, b) and observations from
/// Rng::stream(seed, 2i + 2, b); blocks are merged in index order so the
/// estimate does not depend on the worker count.
inline constexpr std::int64_t kReplicationBlock = 1000;

/// Fixed-composition experiment (conditional LDP).
RateEstimate run_conditional_ldp(const LdpExperiment& exp, int workers = 1);

/// iid-observation experiment (unconditional LDP). The tilted estimator
/// samples observations from the minimizer zeta* of K(nu; zeta) + H(zeta|mu)
/// and then tilts the weights towards nu, carrying both likelihood ratios.
RateEstimate run_unconditional_ldp(const LdpExperiment& exp, int workers = 1);

/// Dispatch on exp.observations.
RateEstimate run_ldp(const LdpExperiment& exp, int workers = 1);

/// inf of `rate` over the TV ball B(center, epsilon), searched on the
/// segment from center towards `minimizer` (where the rate vanishes),
/// clipped to the ball, by golden-section. Exact on two-letter alphabets.
double ball_infimum(const std::function<ExtendedReal(const FiniteMeasure&)>& rate,
                    const FiniteMeasure& center, double epsilon, const FiniteMeasure& minimizer);

/// The analytic reference a verify run compares its slope with: the ball
/// infimum of the conditional rate (fixed composition) or of K (iid), in
/// units of the experiment's speed.
double analytic_ball_infimum(const LdpExperiment& exp);

}  // namespace ldboot
