#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ldboot/errors.hpp"
#include "ldboot/measures.hpp"
#include "oracles.hpp"

namespace ldboot {
namespace {

using testing::kInf;

TEST(FiniteMeasure, TotalsAndProbabilityPredicate) {
  const FiniteMeasure m({0.25, 0.25, 0.5});
  EXPECT_EQ(m.alphabet_size(), 3u);
  EXPECT_DOUBLE_EQ(m.total(), 1.0);
  EXPECT_TRUE(m.is_probability());
  EXPECT_FALSE(FiniteMeasure({0.5, 0.5 + 2e-9}).is_probability());
  EXPECT_TRUE(FiniteMeasure({0.5, 0.5 + 5e-10}).is_probability());
  EXPECT_DOUBLE_EQ(FiniteMeasure({1.0, 3.0}).normalized()[1], 0.75);
}

TEST(FiniteMeasure, RejectsInvalidMass) {
  EXPECT_THROW(FiniteMeasure({0.5, -0.1}), DomainError);
  EXPECT_THROW(FiniteMeasure(std::vector<double>{}), DomainError);
  EXPECT_THROW(FiniteMeasure({NAN, 1.0}), DomainError);
  EXPECT_THROW(FiniteMeasure({0.0, 0.0}).normalized(), DomainError);
  EXPECT_THROW(FiniteMeasure::dirac(2, 2), DomainError);
}

TEST(FiniteMeasure, MixIsConvexCombination) {
  const FiniteMeasure a({1.0, 0.0});
  const FiniteMeasure b({0.0, 1.0});
  const FiniteMeasure m = mix(0.25, a, b);
  EXPECT_DOUBLE_EQ(m[0], 0.25);
  EXPECT_DOUBLE_EQ(m[1], 0.75);
  EXPECT_THROW(mix(1.5, a, b), DomainError);
}

TEST(RelativeEntropy, SpecExamples) {
  const FiniteMeasure mu({0.3, 0.7});
  EXPECT_EQ(relative_entropy(mu, mu).value(), 0.0);
  const double expected = 0.8 * std::log(9.0);
  EXPECT_NEAR(relative_entropy(FiniteMeasure({0.1, 0.9}), FiniteMeasure({0.9, 0.1})).value(),
              expected, 1e-14);
  EXPECT_NEAR(expected, 1.75786, 1e-4);
  EXPECT_TRUE(relative_entropy(FiniteMeasure({1.0, 0.0}), FiniteMeasure({0.0, 1.0})).is_infinite());
}

TEST(RelativeEntropy, ZeroLogZeroIsZero) {
  const double h = relative_entropy(FiniteMeasure({0.0, 1.0}), FiniteMeasure({0.5, 0.5})).value();
  EXPECT_NEAR(h, std::log(2.0), 1e-15);
}

TEST(RelativeEntropy, RejectsMismatchAndNonProbability) {
  EXPECT_THROW(relative_entropy(FiniteMeasure({1.0}), FiniteMeasure({0.5, 0.5})), DimensionError);
  EXPECT_THROW(relative_entropy(FiniteMeasure({0.4, 0.4}), FiniteMeasure({0.5, 0.5})), DomainError);
}

TEST(EntropyChain, JointEqualsReference) {
  const JointFiniteMeasure j({0.0, 2.0}, 2, {0.1, 0.4, 0.3, 0.2});
  const ChainRuleTerms t = entropy_chain_check(j, j);
  EXPECT_EQ(t.direct.value(), 0.0);
  EXPECT_EQ(t.integrated.value(), 0.0);
}

TEST(EntropyChain, ProductJointsReduceToEntropy) {
  const std::vector<double> theta{0.25, 0.75};
  const std::vector<double> nu{0.6, 0.4};
  const std::vector<double> gamma{0.5, 0.5};
  std::vector<double> a;
  std::vector<double> b;
  for (double t : theta) {
    for (std::size_t x = 0; x < 2; ++x) {
      a.push_back(t * nu[x]);
      b.push_back(t * gamma[x]);
    }
  }
  const ChainRuleTerms terms =
      entropy_chain_check(JointFiniteMeasure({0.5, 1.5}, 2, a), JointFiniteMeasure({0.5, 1.5}, 2, b));
  const double h = testing::entropy_sum(nu, gamma);
  EXPECT_NEAR(terms.direct.value(), h, 1e-14);
  EXPECT_NEAR(terms.integrated.value(), h, 1e-14);
}

TEST(EntropyChain, MismatchedFirstMarginalIsContractError) {
  const JointFiniteMeasure a({0.0, 1.0}, 2, {0.25, 0.25, 0.25, 0.25});
  const JointFiniteMeasure b({0.0, 1.0}, 2, {0.5, 0.25, 0.125, 0.125});
  EXPECT_THROW(entropy_chain_check(a, b), ContractError);
}

TEST(JointMeasure, MarginalsMomentAndProjection) {
  const JointFiniteMeasure j({0.0, 2.0}, 2, {0.3, 0.2, 0.1, 0.4});
  EXPECT_DOUBLE_EQ(j.first_marginal()[0], 0.5);
  EXPECT_DOUBLE_EQ(j.second_marginal()[1], 0.6);
  EXPECT_DOUBLE_EQ(j.first_moment(), 1.0);
  EXPECT_TRUE(j.has_mean_one_weights());
  EXPECT_DOUBLE_EQ(j.weighted_projection()[0], 0.2);
  EXPECT_DOUBLE_EQ(j.weighted_projection()[1], 0.8);
  EXPECT_THROW(JointFiniteMeasure({0.0}, 2, {0.5}), DimensionError);
}

TEST(Kernel, ComposeAndSliceMeans) {
  const Kernel k({0.0, 2.0}, {FiniteMeasure({0.5, 0.5}), FiniteMeasure({0.0, 1.0})});
  EXPECT_DOUBLE_EQ(k.slice_mean(0), 1.0);
  EXPECT_DOUBLE_EQ(k.slice_mean(1), 2.0);
  const JointFiniteMeasure j = k.compose(FiniteMeasure({0.5, 0.5}));
  EXPECT_DOUBLE_EQ(j.at(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(j.at(1, 1), 0.5);
  EXPECT_THROW(Kernel({0.0, 1.0}, {FiniteMeasure({0.5, 0.6})}), DomainError);
}

TEST(W1Line, SpecExamples) {
  EXPECT_DOUBLE_EQ(w1_line(AtomicWeightMeasure({0, 0, 0}), AtomicWeightMeasure({1, 1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(w1_line(AtomicWeightMeasure({3, 1, 2}), AtomicWeightMeasure({1, 2, 3})), 0.0);
  EXPECT_THROW(w1_line(AtomicWeightMeasure({1, 2}), AtomicWeightMeasure({1})), UnsupportedError);
}

TEST(W1Line, MatchesBruteForceAssignment) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(1 + rng.uniform_index(7));
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (double& x : a) x = 3.0 * rng.uniform();
    for (double& x : b) x = 3.0 * rng.uniform();
    EXPECT_NEAR(w1_line(AtomicWeightMeasure(a), AtomicWeightMeasure(b)),
                testing::brute_force_w1(a, b), 1e-12);
  }
}

TEST(TotalVariation, SpecExamples) {
  const FiniteMeasure m({0.3, 0.7});
  EXPECT_EQ(tv_distance(m, m), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(FiniteMeasure({1.0, 0.0}), FiniteMeasure({0.0, 1.0})), 1.0);
  EXPECT_NEAR(tv_distance(FiniteMeasure({0.8, 0.2}), FiniteMeasure({0.5, 0.5})), 0.3, 1e-15);
  EXPECT_THROW(tv_distance(FiniteMeasure({1.0}), m), DimensionError);
}

TEST(BoundedMetric, SpecExamples) {
  EXPECT_EQ(bounded_metric(2.5, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(bounded_metric(0.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(bounded_metric(0.0, 3.0), 0.75);
  EXPECT_DOUBLE_EQ(bounded_metric(3.0, 0.0), 0.75);
}

TEST(Rebalance, AlreadyBalancedIsUnchanged) {
  Rng rng(1);
  const AtomicWeightMeasure a({0.5, 1.5, 1.0});
  EXPECT_EQ(rebalance_atoms(a, rng).values(), a.values());
}

TEST(Rebalance, RemovesExcessMass) {
  Rng rng(2);
  const AtomicWeightMeasure out = rebalance_atoms(AtomicWeightMeasure({2, 2, 2}), rng);
  EXPECT_NEAR(out.sum(), 3.0, 1e-12);
  for (double x : out.values()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 2.0);
  }
}

TEST(Rebalance, AddsMissingMass) {
  Rng rng(3);
  const AtomicWeightMeasure in({0.5, 0.5, 0.5});
  const AtomicWeightMeasure out = rebalance_atoms(in, rng);
  EXPECT_NEAR(out.sum(), 3.0, 1e-12);
  for (double x : out.values()) EXPECT_GE(x, 0.5);
  EXPECT_LE(w1_line(in, out), 0.5 + 1e-9);
}

TEST(PushForward, SpecExamples) {
  const AtomicWeightMeasure a({2.0, 4.0});
  EXPECT_EQ(push_forward_scale(a, 1.0).values(), a.values());
  EXPECT_EQ(push_forward_scale(a, 2.0).values(), (std::vector<double>{1.0, 2.0}));
  EXPECT_THROW(push_forward_scale(a, 0.0), DomainError);
  EXPECT_THROW(push_forward_scale(a, -1.0), DomainError);
}

TEST(PushForward, MeanScalesLinearly) {
  Rng rng(5);
  std::vector<double> atoms(9);
  for (double& x : atoms) x = 4.0 * rng.uniform();
  const AtomicWeightMeasure a(atoms);
  EXPECT_NEAR(push_forward_scale(a, 3.0).mean(), a.mean() / 3.0, 1e-14);
}

TEST(AtomicMeasure, MeanOnePredicate) {
  EXPECT_TRUE(AtomicWeightMeasure({0.0, 2.0}).has_mean_one());
  EXPECT_FALSE(AtomicWeightMeasure({0.0, 2.1}).has_mean_one());
  EXPECT_THROW(AtomicWeightMeasure({-1.0}), DomainError);
}

TEST(Csv, WritesHeaderAndRows) {
  std::ostringstream os;
  write_csv(os, FiniteMeasure({0.25, 0.75}));
  EXPECT_NE(os.str().find("0.25"), std::string::npos);
  EXPECT_NE(os.str().find("0.75"), std::string::npos);
  std::ostringstream atoms;
  write_csv(atoms, AtomicWeightMeasure({1.5, 0.5}));
  EXPECT_NE(atoms.str().find("1.5"), std::string::npos);
}

}  // namespace
}  // namespace ldboot
