#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ldboot/errors.hpp"
#include "ldboot/montecarlo.hpp"
#include "oracles.hpp"

namespace ldboot {
namespace {

LdpExperiment efron_experiment() {
  LdpExperiment e;
  e.scheme = MOutOfN{1.0};
  e.mu = FiniteMeasure({0.5, 0.5});
  e.target = FiniteMeasure({0.8, 0.2});
  e.epsilon = 0.05;
  e.n_values = {50, 100, 200, 400};
  e.replications = 20000;
  e.estimator = EstimatorKind::tilted;
  e.seed = 7;
  return e;
}

TEST(FitRateSlope, ExactExponential) {
  std::vector<FitPoint> pts;
  for (double n : {10.0, 20.0, 40.0, 80.0}) pts.push_back({n, -0.3 * n, 1.0});
  const SlopeFit f = fit_rate_slope(pts);
  EXPECT_NEAR(f.slope, 0.3, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-10);
}

TEST(FitRateSlope, InterceptAbsorbsPrefactor) {
  std::vector<FitPoint> pts;
  for (double n : {10.0, 20.0, 40.0}) pts.push_back({n, std::log(10.0) - 0.25 * n, 2.0});
  const SlopeFit f = fit_rate_slope(pts);
  EXPECT_NEAR(f.slope, 0.25, 1e-12);
  EXPECT_NEAR(f.intercept, -std::log(10.0), 1e-10);
}

TEST(FitRateSlope, NeedsThreeFinitePoints) {
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(fit_rate_slope({{1.0, -1.0, 1.0}, {2.0, -2.0, 1.0}}), ContractError);
  EXPECT_THROW(fit_rate_slope({{1.0, -1.0, 1.0}, {2.0, -2.0, 1.0}, {3.0, ninf, 1.0}}),
               ContractError);
  EXPECT_THROW(fit_rate_slope({{1.0, -1.0, 1.0}, {1.0, -2.0, 1.0}, {1.0, -3.0, 1.0}}),
               ContractError);
}

// Noise model: log p_i = log A - c x_i + sigma_i Z_i with sigma_i growing
// with x_i, as the delta-method error of a rarer estimate does. Weights are
// the true inverse variances.
TEST(FitRateSlope, CoverageOfTwoStderrInterval) {
  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::vector<double> xs{100.0, 200.0, 300.0, 400.0};
  const std::vector<double> sigma{0.02, 0.05, 0.1, 0.2};
  int covered = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<FitPoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      pts.push_back({xs[i], std::log(3.0) - 0.2 * xs[i] + sigma[i] * z(gen),
                     1.0 / (sigma[i] * sigma[i])});
    }
    const SlopeFit f = fit_rate_slope(pts);
    if (std::abs(f.slope - 0.2) <= 2.0 * f.stderr_slope) ++covered;
  }
  EXPECT_GE(covered, 950);
}

TEST(Validate, RejectsBadExperiments) {
  const LdpExperiment good = efron_experiment();
  EXPECT_NO_THROW(validate(good));
  auto bad = [&](auto mutate) {
    LdpExperiment e = good;
    mutate(e);
    return e;
  };
  EXPECT_THROW(validate(bad([](auto& e) { e.epsilon = 0.0; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.epsilon = 1.0; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.n_values = {100, 50}; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.n_values = {}; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.n_values = {1, 10, 20}; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.replications = 999; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.fit_points = 2; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.n_values = {51, 100, 200}; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.scheme = DeleteH{0.5}; })), ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) {
                 e.estimator = EstimatorKind::direct;
                 e.speed = SpeedKind::m;
                 e.scheme = DeleteH{0.5};
               })),
               ConfigError);
  EXPECT_THROW(validate(bad([](auto& e) { e.target = FiniteMeasure({0.5, 0.25, 0.25}); })),
               ConfigError);
}

TEST(TiltedEstimator, NoTiltIsTheDirectEstimator) {
  const FiniteMeasure nu({0.6, 0.4});
  const std::int64_t n = 40;
  const std::int64_t R = 3000;
  Rng a(99);
  const TiltedOutcome t =
      tilted_efron_estimator(n, n, {20, 20}, nu, 0.1, R, a, FiniteMeasure({0.5, 0.5}));
  Rng b(99);
  const std::vector<double> p{0.5, 0.5};
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < R; ++r) {
    const auto N = sample_multinomial(b, n, p);
    const double d = 0.5 * (std::abs(N[0] / 40.0 - 0.6) + std::abs(N[1] / 40.0 - 0.4));
    if (d < 0.1) ++hits;
  }
  EXPECT_EQ(t.hits, hits);
  EXPECT_EQ(t.p_hat, static_cast<double>(hits) / static_cast<double>(R));
}

TEST(TiltedEstimator, AgreesWithDirectOnNonRareEventAcrossSeeds) {
  const FiniteMeasure nu({0.5, 0.5});
  int agreements = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng a = Rng::stream(seed, 1, 0);
    Rng b = Rng::stream(seed, 2, 0);
    const TiltedOutcome tilted =
        tilted_efron_estimator(50, 50, {25, 25}, nu, 0.2, 4000, a, FiniteMeasure({0.6, 0.4}));
    const TiltedOutcome direct =
        tilted_efron_estimator(50, 50, {25, 25}, nu, 0.2, 4000, b, FiniteMeasure({0.5, 0.5}));
    const double se = std::hypot(tilted.stderr_p, direct.stderr_p);
    if (std::abs(tilted.p_hat - direct.p_hat) <= 3.0 * se) ++agreements;
  }
  EXPECT_EQ(agreements, 50);
}

TEST(TiltedEstimator, RareEventHasSmallRelativeError) {
  const FiniteMeasure nu({0.8, 0.2});
  Rng a(5);
  const TiltedOutcome t = tilted_efron_estimator(400, 400, {200, 200}, nu, 0.05, 100000, a);
  EXPECT_GT(t.hits, 0);
  EXPECT_LT(t.stderr_p / t.p_hat, 0.1);
  Rng b(5);
  const TiltedOutcome d =
      tilted_efron_estimator(400, 400, {200, 200}, nu, 0.05, 100000, b, FiniteMeasure({0.5, 0.5}));
  EXPECT_EQ(d.hits, 0);
}

TEST(TiltedEstimator, DegenerateTilt) {
  Rng rng(1);
  EXPECT_THROW(tilted_efron_estimator(10, 10, {5, 5}, FiniteMeasure({1.0, 0.0}), 0.1, 100, rng,
                                      FiniteMeasure({1.0, 0.0})),
               DegenerateEstimatorError);
  EXPECT_THROW(tilted_efron_estimator(10, 10, {5, 5}, FiniteMeasure({0.5, 0.5}), 0.1, 100, rng,
                                      FiniteMeasure({0.0, 1.0})),
               DegenerateEstimatorError);
  EXPECT_THROW(tilted_efron_estimator(10, 10, {5, 4}, FiniteMeasure({0.5, 0.5}), 0.1, 100, rng),
               DomainError);
}

TEST(DirectEstimator, StandardErrorIsBinomial) {
  LdpExperiment e = efron_experiment();
  e.estimator = EstimatorKind::direct;
  e.target = FiniteMeasure({0.6, 0.4});
  e.epsilon = 0.05;
  e.n_values = {20, 40, 60};
  e.replications = 5000;
  const RateEstimate est = run_conditional_ldp(e);
  for (const RatePoint& p : est.points) {
    ASSERT_GT(p.hits, 0);
    const double ph = static_cast<double>(p.hits) / 5000.0;
    EXPECT_DOUBLE_EQ(p.p_hat, ph);
    EXPECT_NEAR(p.stderr_p, std::sqrt(ph * (1.0 - ph) / 4999.0), 1e-12);
  }
}

TEST(ConditionalLdp, MonotoneInEpsilonUnderSharedStream) {
  for (EstimatorKind kind : {EstimatorKind::direct, EstimatorKind::tilted}) {
    LdpExperiment e = efron_experiment();
    e.estimator = kind;
    e.target = FiniteMeasure({0.6, 0.4});
    e.n_values = {20, 40, 80};
    e.replications = 2000;
    std::vector<double> previous(3, 0.0);
    for (double eps : {0.02, 0.05, 0.1, 0.2}) {
      e.epsilon = eps;
      const RateEstimate est = run_conditional_ldp(e);
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GE(est.points[i].p_hat, previous[i]) << "eps " << eps;
        previous[i] = est.points[i].p_hat;
      }
    }
  }
}

TEST(ConditionalLdp, IndependentOfWorkerCount) {
  const LdpExperiment e = efron_experiment();
  const RateEstimate one = run_conditional_ldp(e, 1);
  const RateEstimate three = run_conditional_ldp(e, 3);
  ASSERT_EQ(one.points.size(), three.points.size());
  for (std::size_t i = 0; i < one.points.size(); ++i) {
    EXPECT_EQ(one.points[i].hits, three.points[i].hits);
    EXPECT_EQ(one.points[i].p_hat, three.points[i].p_hat);
    EXPECT_EQ(one.points[i].log_p_stderr, three.points[i].log_p_stderr);
  }
  EXPECT_EQ(one.slope, three.slope);
}

TEST(ConditionalLdp, TargetAtCenterHasZeroSlope) {
  LdpExperiment e = efron_experiment();
  e.estimator = EstimatorKind::direct;
  e.target = e.mu;
  e.epsilon = 0.1;
  e.n_values = {400, 800, 1600};
  e.replications = 1000;
  const RateEstimate est = run_conditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  EXPECT_LE(std::abs(est.slope), 2.0 * est.slope_stderr + 1e-15);
  EXPECT_NEAR(analytic_ball_infimum(e), 0.0, 1e-15);
}

TEST(ConditionalLdp, EfronTiltedSlopeMatchesBallInfimum) {
  const LdpExperiment e = efron_experiment();
  const RateEstimate est = run_conditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  const double ball = analytic_ball_infimum(e);
  // H(.|mu) is increasing along the segment, so the infimum sits on the
  // ball boundary nu_1 = 0.75.
  EXPECT_NEAR(ball, testing::entropy_sum({0.75, 0.25}, {0.5, 0.5}), 1e-9);
  EXPECT_LT(std::abs(est.slope - ball) / ball, 0.15);
}

TEST(ConditionalLdp, DirectMissesAreReported) {
  LdpExperiment e = efron_experiment();
  e.estimator = EstimatorKind::direct;
  e.replications = 1000;
  const RateEstimate est = run_conditional_ldp(e);
  EXPECT_FALSE(est.fitted);
  EXPECT_TRUE(est.points.back().missing);
  EXPECT_NE(est.advice.find("tilted"), std::string::npos);
}

TEST(ConditionalLdp, DeleteHalfSlopeMatchesJackknifeRate) {
  LdpExperiment e = efron_experiment();
  e.scheme = DeleteH{0.5};
  e.estimator = EstimatorKind::direct;
  e.n_values = {24, 32, 40, 48};
  e.replications = 1000000;
  const RateEstimate est = run_conditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  const double ball = analytic_ball_infimum(e);
  EXPECT_GT(ball, 0.0);
  EXPECT_LT(std::abs(est.slope - ball) / ball, 0.2) << est.slope << " vs " << ball;
}

TEST(ConditionalLdp, RescaledSpeedMatchesSanovInfimum) {
  LdpExperiment e = efron_experiment();
  e.scheme = MOutOfN{0.5};
  e.speed = SpeedKind::m;
  e.n_values = {100, 200, 400, 800};
  const RateEstimate est = run_conditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  EXPECT_EQ(est.points[0].speed, 50.0);
  const double ball = analytic_ball_infimum(e);
  EXPECT_NEAR(ball, testing::entropy_sum({0.75, 0.25}, {0.5, 0.5}), 1e-9);
  EXPECT_LT(std::abs(est.slope - ball) / ball, 0.2);
}

TEST(UnconditionalLdp, TargetAtCenterHasZeroSlope) {
  LdpExperiment e = efron_experiment();
  e.observations = ObservationKind::iid;
  e.estimator = EstimatorKind::direct;
  e.target = e.mu;
  e.epsilon = 0.1;
  e.n_values = {400, 800, 1600};
  e.replications = 1000;
  const RateEstimate est = run_unconditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  EXPECT_LE(std::abs(est.slope), 2.0 * est.slope_stderr + 1e-15);
}

TEST(UnconditionalLdp, SmoothingLowersTheSlope) {
  LdpExperiment e = efron_experiment();
  e.observations = ObservationKind::iid;
  e.mu = FiniteMeasure({0.9, 0.1});
  e.target = FiniteMeasure({0.5, 0.5});
  e.n_values = {50, 100, 200, 400};
  const RateEstimate est = run_unconditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  LdpExperiment cond = e;
  cond.observations = ObservationKind::fixed_composition;
  const double conditional_ball = analytic_ball_infimum(cond);
  EXPECT_LT(est.slope, conditional_ball - 2.0 * est.slope_stderr);
  EXPECT_LT(std::abs(est.slope - analytic_ball_infimum(e)) / analytic_ball_infimum(e), 0.2);
}

TEST(UnconditionalLdp, DeleteZeroFollowsSanov) {
  LdpExperiment e;
  e.scheme = DeleteH{0.0};
  e.observations = ObservationKind::iid;
  e.mu = FiniteMeasure({0.5, 0.5});
  e.target = FiniteMeasure({0.75, 0.25});
  e.epsilon = 0.05;
  e.n_values = {20, 40, 60, 80};
  e.replications = 1000000;
  e.seed = 3;
  const RateEstimate est = run_unconditional_ldp(e);
  ASSERT_TRUE(est.fitted);
  const double ball = analytic_ball_infimum(e);
  EXPECT_NEAR(ball, testing::entropy_sum({0.7, 0.3}, {0.5, 0.5}), 1e-9);
  EXPECT_LT(std::abs(est.slope - ball) / ball, 0.2) << est.slope << " vs " << ball;
}

TEST(UnconditionalLdp, RejectsFixedComposition) {
  EXPECT_THROW(run_unconditional_ldp(efron_experiment()), ConfigError);
  LdpExperiment e = efron_experiment();
  e.observations = ObservationKind::iid;
  EXPECT_THROW(run_conditional_ldp(e), ConfigError);
}

TEST(BallInfimum, ExactOnTwoLetters) {
  const FiniteMeasure mu({0.5, 0.5});
  auto h = [&](const FiniteMeasure& nu) { return relative_entropy(nu, mu); };
  EXPECT_NEAR(ball_infimum(h, FiniteMeasure({0.9, 0.1}), 0.1, mu),
              testing::entropy_sum({0.8, 0.2}, {0.5, 0.5}), 1e-10);
  EXPECT_EQ(ball_infimum(h, FiniteMeasure({0.55, 0.45}), 0.1, mu), 0.0);
  EXPECT_THROW(ball_infimum(h, mu, 0.0, mu), DomainError);
}

}  // namespace
}  // namespace ldboot
