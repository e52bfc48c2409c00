#include <gtest/gtest.h>

#include <cmath>

#include "ldboot/errors.hpp"
#include "ldboot/transforms.hpp"

namespace ldboot {
namespace {

TEST(CgfScaledPoisson, SpecExamples) {
  EXPECT_EQ(cgf_scaled_poisson(1.0, 0.0), 0.0);
  EXPECT_NEAR(cgf_scaled_poisson(1.0, 1.0), std::exp(1.0) - 1.0, 1e-15);
  EXPECT_NEAR(cgf_scaled_poisson(2.0, 2.0), 2.0 * (std::exp(1.0) - 1.0), 1e-14);
  EXPECT_THROW(cgf_scaled_poisson(0.0, 1.0), DomainError);
}

TEST(LegendreScaledPoisson, SpecExamples) {
  EXPECT_EQ(legendre_scaled_poisson(1.0, 1.0).value(), 0.0);
  EXPECT_EQ(legendre_scaled_poisson(2.5, 0.0).value(), 2.5);
  EXPECT_NEAR(legendre_scaled_poisson(1.0, 2.0).value(), 1.0 - 2.0 + 2.0 * std::log(2.0), 1e-15);
  EXPECT_TRUE(legendre_scaled_poisson(1.0, -0.1).is_infinite());
  EXPECT_THROW(legendre_scaled_poisson(-1.0, 1.0), DomainError);
}

TEST(LegendreBinomial, SpecExamples) {
  EXPECT_NEAR(legendre_binomial(3, 1.0).value(), 0.0, 1e-15);
  EXPECT_TRUE(legendre_binomial(2, 2.1).is_infinite());
  EXPECT_TRUE(legendre_binomial(2, -0.1).is_infinite());
  EXPECT_NEAR(legendre_binomial(2, 2.0).value(), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(legendre_binomial(4, 0.0).value(), 4.0 * std::log(4.0 / 3.0), 1e-15);
  EXPECT_THROW(legendre_binomial(1, 0.5), DomainError);
}

TEST(CgfSpec, MeanOneAtOriginForBuiltInLaws) {
  for (const CgfSpec& c : {CgfSpec::scaled_poisson(0.5), CgfSpec::scaled_poisson(3.0),
                           CgfSpec::binomial(2), CgfSpec::binomial(7)}) {
    EXPECT_NEAR(c.value(0.0), 0.0, 1e-15) << c.name();
    EXPECT_NEAR(c.derivative(0.0), 1.0, 1e-10) << c.name();
    EXPECT_GT(c.second_derivative(0.3), 0.0) << c.name();
  }
}

TEST(CgfSpec, TabulatedMatchesDirectSum) {
  const CgfSpec c = CgfSpec::tabulated({0.5, 1.5}, {1.0, 1.0});
  const double alpha = 0.7;
  const double direct = std::log(0.5 * std::exp(0.5 * alpha) + 0.5 * std::exp(1.5 * alpha));
  EXPECT_NEAR(c.value(alpha), direct, 1e-14);
  EXPECT_NEAR(c.mean(), 1.0, 1e-14);
  const SupportHull h = c.hull();
  EXPECT_EQ(h.lower, 0.5);
  EXPECT_EQ(h.upper, 1.5);
  EXPECT_NEAR(h.lower_mass, 0.5, 1e-15);
}

TEST(CgfSpec, RejectsInvalidLaws) {
  EXPECT_THROW(CgfSpec::scaled_poisson(0.0), DomainError);
  EXPECT_THROW(CgfSpec::binomial(1), DomainError);
  EXPECT_THROW(CgfSpec::tabulated({-1.0, 1.0}, {0.5, 0.5}), DomainError);
  EXPECT_THROW(CgfSpec::tabulated({1.0}, {0.5, 0.5}), DimensionError);
  EXPECT_THROW(CgfSpec::tabulated({1.0, 2.0}, {0.0, 0.0}), DomainError);
}

TEST(LegendreNumeric, MatchesClosedFormPoisson) {
  const LegendreResult r = legendre_numeric(CgfSpec::scaled_poisson(1.0), 2.0);
  EXPECT_NEAR(r.value.value(), 1.0 - 2.0 + 2.0 * std::log(2.0), 1e-12);
  EXPECT_EQ(r.attained, LegendreResult::Attained::interior);
  EXPECT_NEAR(r.argmax_alpha, std::log(2.0), 1e-9);
}

TEST(LegendreNumeric, MeanPointIsZero) {
  EXPECT_NEAR(legendre_numeric(CgfSpec::binomial(3), 1.0).value.value(), 0.0, 1e-12);
}

TEST(LegendreNumeric, PointMassLaw) {
  const CgfSpec c = CgfSpec::tabulated({1.0}, {1.0});
  EXPECT_TRUE(legendre_numeric(c, 0.5).value.is_infinite());
  EXPECT_TRUE(legendre_numeric(c, 2.0).value.is_infinite());
  EXPECT_EQ(legendre_numeric(c, 1.0).value.value(), 0.0);
}

TEST(LegendreNumeric, EndpointsTakeLimitValues) {
  // Binomial(2, 1/2): P(Y = 2) = 1/4, so the upper endpoint value is log 4.
  const LegendreResult top = legendre_numeric(CgfSpec::binomial(2), 2.0);
  EXPECT_EQ(top.attained, LegendreResult::Attained::upper_endpoint);
  EXPECT_NEAR(top.value.value(), std::log(4.0), 1e-12);
  const LegendreResult bottom = legendre_numeric(CgfSpec::scaled_poisson(2.0), 0.0);
  EXPECT_EQ(bottom.attained, LegendreResult::Attained::lower_endpoint);
  EXPECT_NEAR(bottom.value.value(), 2.0, 1e-12);
  EXPECT_EQ(legendre_numeric(CgfSpec::binomial(2), 3.0).attained,
            LegendreResult::Attained::outside);
}

TEST(LegendreNumeric, RejectsBadArguments) {
  EXPECT_THROW(legendre_numeric(CgfSpec::binomial(2), 1.0, 0.0), DomainError);
  EXPECT_THROW(legendre_numeric(CgfSpec::binomial(2), NAN), DomainError);
}

TEST(LegendreNumeric, AgreesWithClosedFormsOnAcceptanceGrid) {
  const std::vector<double> xs{0.01, 0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<CgfSpec> laws;
  for (double l : {0.5, 1.0, 2.0}) laws.push_back(CgfSpec::scaled_poisson(l));
  for (int K : {2, 3, 5}) laws.push_back(CgfSpec::binomial(K));
  for (const CgfSpec& c : laws) {
    const LegendreFn closed = *closed_form_legendre(c);
    for (double x : xs) {
      const ExtendedReal a = closed(x);
      const ExtendedReal b = legendre_numeric(c, x).value;
      if (a.is_infinite()) {
        EXPECT_TRUE(b.is_infinite()) << c.name() << " x=" << x;
      } else {
        EXPECT_NEAR(a.value(), b.value(), 1e-8) << c.name() << " x=" << x;
      }
    }
  }
}

TEST(LegendreEvaluator, FallsBackToNumericForTabulated) {
  const CgfSpec c = CgfSpec::tabulated({0.5, 1.5}, {0.5, 0.5});
  EXPECT_FALSE(closed_form_legendre(c).has_value());
  // Two-point law: Lambda*(x) is the binary relative entropy of (x - 0.5)
  // against 1/2.
  const double x = 1.2;
  const double p = x - 0.5;
  const double direct = p * std::log(p / 0.5) + (1 - p) * std::log((1 - p) / 0.5);
  EXPECT_NEAR(legendre_evaluator(c)(x).value(), direct, 1e-10);
}

TEST(Gargamel, ScaledPoissonSatisfiesIt) {
  const GargamelReport r = gargamel_condition(CgfSpec::scaled_poisson(1.0), 50.0);
  EXPECT_TRUE(r.satisfied());
  EXPECT_LE(r.left_limit_estimate, 1e-9);
  EXPECT_TRUE(r.right_unbounded);
}

TEST(Gargamel, BinomialIsBoundedByK) {
  const GargamelReport r = gargamel_condition(CgfSpec::binomial(3), 50.0);
  EXPECT_FALSE(r.satisfied());
  EXPECT_LE(r.left_limit_estimate, 1e-9);
  EXPECT_FALSE(r.right_unbounded);
  EXPECT_NEAR(r.right_bound, 3.0, 1e-6);
}

TEST(Gargamel, TabulatedLawReportsHull) {
  const GargamelReport r = gargamel_condition(CgfSpec::tabulated({0.5, 2.0}, {0.5, 0.5}), 80.0);
  EXPECT_NEAR(r.left_limit_estimate, 0.5, 1e-6);
  EXPECT_FALSE(r.right_unbounded);
  EXPECT_NEAR(r.right_bound, 2.0, 1e-6);
  EXPECT_THROW(gargamel_condition(CgfSpec::binomial(2), 0.0), DomainError);
}

}  // namespace
}  // namespace ldboot
