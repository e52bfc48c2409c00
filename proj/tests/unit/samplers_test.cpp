#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/hypergeometric.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <map>
#include <numeric>

#include "ldboot/errors.hpp"
#include "ldboot/samplers.hpp"
#include "oracles.hpp"

namespace ldboot {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = Rng::stream(42, 1, 0);
  Rng b = Rng::stream(42, 1, 0);
  Rng c = Rng::stream(42, 1, 1);
  Rng d = Rng::stream(42, 2, 0);
  const auto first = a();
  EXPECT_EQ(first, b());
  EXPECT_NE(first, c());
  EXPECT_NE(first, d());
}

TEST(Rng, UniformIndexIsUnbiased) {
  Rng rng(9);
  std::vector<std::int64_t> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  EXPECT_GT(testing::chi_square_p(counts, std::vector<double>(7, 1.0 / 7)), 0.001);
}

TEST(DiscreteSamplers, BinomialMatchesPmf) {
  Rng rng(21);
  const boost::math::binomial_distribution<double> law(30, 0.2);
  std::vector<std::int64_t> counts(31, 0);
  std::vector<double> probs(31);
  for (int k = 0; k <= 30; ++k) probs[k] = boost::math::pdf(law, k);
  for (int i = 0; i < 100000; ++i) ++counts[sample_binomial(rng, 30, 0.2)];
  EXPECT_GT(testing::chi_square_p(counts, probs), 0.001);
}

TEST(DiscreteSamplers, PoissonMatchesPmf) {
  Rng rng(22);
  const boost::math::poisson_distribution<double> law(3.5);
  std::vector<std::int64_t> counts(40, 0);
  std::vector<double> probs(40);
  for (int k = 0; k < 40; ++k) probs[k] = boost::math::pdf(law, k);
  for (int i = 0; i < 100000; ++i) {
    const auto k = sample_poisson(rng, 3.5);
    ASSERT_LT(k, 40);
    ++counts[static_cast<std::size_t>(k)];
  }
  EXPECT_GT(testing::chi_square_p(counts, probs), 0.001);
}

TEST(DiscreteSamplers, HypergeometricMatchesPmf) {
  Rng rng(23);
  const boost::math::hypergeometric_distribution<double> law(7, 10, 25);
  std::vector<std::int64_t> counts(8, 0);
  std::vector<double> probs(8);
  for (unsigned k = 0; k <= 7; ++k) probs[k] = boost::math::pdf(law, k);
  for (int i = 0; i < 100000; ++i) ++counts[sample_hypergeometric(rng, 25, 7, 10)];
  EXPECT_GT(testing::chi_square_p(counts, probs), 0.001);
}

TEST(MultinomialWeights, SingleCellAndEfron) {
  Rng rng(1);
  EXPECT_EQ(sample_multinomial_weights(1, 17, rng), std::vector<double>{1.0});
  const auto w = sample_multinomial_weights(9, 9, rng);
  EXPECT_EQ(sum(w), 9.0);
  for (double x : w) EXPECT_EQ(x, std::round(x));
  EXPECT_THROW(sample_multinomial_weights(3, 0, rng), DomainError);
}

TEST(MultinomialWeights, FirstMarginalIsBinomial) {
  Rng rng(2);
  const boost::math::binomial_distribution<double> law(20, 1.0 / 20);
  std::vector<std::int64_t> counts(21, 0);
  std::vector<double> probs(21);
  for (int k = 0; k <= 20; ++k) probs[k] = boost::math::pdf(law, k);
  for (int i = 0; i < 100000; ++i) {
    const auto w = sample_multinomial_weights(20, 20, rng);
    ++counts[static_cast<std::size_t>(std::lround(w[0]))];  // (m/n) W_1 = W_1 here
  }
  EXPECT_GT(testing::chi_square_p(counts, probs), 0.001);
}

TEST(Coupling, InvariantsOnEveryOutcome) {
  Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform_index(12));
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.uniform_index(30));
    const CouplingOutcome c = couple_poisson_multinomial(n, m, rng);
    std::int64_t z_total = 0;
    std::int64_t l1 = 0;
    bool all_up = true;
    bool all_down = true;
    for (std::size_t j = 0; j < c.z.size(); ++j) {
      ASSERT_GE(c.m[j], 0);
      z_total += c.z[j];
      l1 += std::abs(c.m[j] - c.z[j]);
      all_up = all_up && c.m[j] >= c.z[j];
      all_down = all_down && c.m[j] <= c.z[j];
    }
    ASSERT_EQ(std::accumulate(c.m.begin(), c.m.end(), std::int64_t{0}), m);
    ASSERT_TRUE(all_up || all_down);
    ASSERT_EQ(l1, std::abs(z_total - m));
    ASSERT_EQ(c.moved_mass, std::abs(z_total - m));
    if (z_total == m) ASSERT_EQ(c.m, c.z);
  }
}

TEST(Coupling, FirstCellIsBinomial) {
  Rng rng(4);
  const boost::math::binomial_distribution<double> law(20, 1.0 / 20);
  std::vector<std::int64_t> counts(21, 0);
  std::vector<double> probs(21);
  for (int k = 0; k <= 20; ++k) probs[k] = boost::math::pdf(law, k);
  for (int i = 0; i < 100000; ++i) ++counts[couple_poisson_multinomial(20, 20, rng).m[0]];
  EXPECT_GT(testing::chi_square_p(counts, probs), 0.001);
}

TEST(IidWeights, SpecExamples) {
  Rng rng(5);
  for (double x : sample_iid_weights(6, IidWeighted{{2.5}, {1.0}}, rng)) EXPECT_DOUBLE_EQ(x, 1.0);
  const IidWeighted law{{1.0, 3.0}, {0.5, 0.5}};
  for (int i = 0; i < 200; ++i) {
    const auto w = sample_iid_weights(5, law, rng);
    EXPECT_NEAR(sum(w), 5.0, 1e-9 * 5.0);
    for (double x : w) EXPECT_GT(x, 0.0);
  }
  bool saw_split = false;
  for (int i = 0; i < 100 && !saw_split; ++i) {
    const auto w = sample_iid_weights(2, law, rng);
    if (w[0] != w[1]) {
      saw_split = true;
      EXPECT_DOUBLE_EQ(std::min(w[0], w[1]), 0.5);
      EXPECT_DOUBLE_EQ(std::max(w[0], w[1]), 1.5);
    }
  }
  EXPECT_TRUE(saw_split);
}

TEST(IidWeights, ZeroInGridIsRejected) {
  Rng rng(6);
  EXPECT_THROW(sample_iid_weights(3, IidWeighted{{0.0, 2.0}, {0.5, 0.5}}, rng), ConfigError);
  EXPECT_THROW(validate(SchemeConfig(IidWeighted{{1.0, 2.0}, {0.5, 0.6}})), ConfigError);
}

TEST(HypergeometricWeights, SmallCasePmf) {
  Rng rng(7);
  EXPECT_EQ(sample_hypergeometric_weights(1, 3, rng), std::vector<double>{1.0});
  std::vector<std::int64_t> counts(3, 0);  // W_1 in {0, 1, 2}
  for (int i = 0; i < 100000; ++i) {
    const auto w = sample_hypergeometric_weights(2, 2, rng);
    ASSERT_EQ(w[0] + w[1], 2.0);
    ++counts[static_cast<std::size_t>(w[0])];
  }
  // C(2,w) C(2,2-w) / C(4,2).
  EXPECT_GT(testing::chi_square_p(counts, {1.0 / 6, 4.0 / 6, 1.0 / 6}), 0.001);
}

TEST(HypergeometricWeights, NeverExceedK) {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const auto w = sample_hypergeometric_weights(15, 3, rng);
    EXPECT_EQ(sum(w), 15.0);
    for (double x : w) EXPECT_LE(x, 3.0);
  }
}

TEST(JackknifeWeights, SpecExamples) {
  Rng rng(9);
  for (double x : sample_jackknife_weights(5, 0, rng)) EXPECT_EQ(x, 1.0);
  auto w = sample_jackknife_weights(4, 2, rng);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(w, (std::vector<double>{0, 0, 2, 2}));
  EXPECT_THROW(sample_jackknife_weights(4, 4, rng), DomainError);
}

TEST(JackknifeWeights, ZeroPositionsAreUniform) {
  Rng rng(10);
  std::vector<std::int64_t> counts(5, 0);
  for (int i = 0; i < 100000; ++i) {
    const auto w = sample_jackknife_weights(5, 1, rng);
    ++counts[static_cast<std::size_t>(std::find(w.begin(), w.end(), 0.0) - w.begin())];
  }
  EXPECT_GT(testing::chi_square_p(counts, std::vector<double>(5, 0.2)), 0.001);
}

TEST(DeterministicWeights, ArrangementsAreUniform) {
  Rng rng(11);
  for (double x : sample_deterministic_weights(std::vector<double>{1, 1, 1}, rng)) EXPECT_EQ(x, 1.0);
  std::vector<std::int64_t> counts(3, 0);
  const std::vector<double> tpl{3, 0, 0};
  for (int i = 0; i < 100000; ++i) {
    const auto w = sample_deterministic_weights(tpl, rng);
    auto sorted = w;
    std::sort(sorted.begin(), sorted.end());
    ASSERT_EQ(sorted, (std::vector<double>{0, 0, 3}));
    ++counts[static_cast<std::size_t>(std::find(w.begin(), w.end(), 3.0) - w.begin())];
  }
  EXPECT_GT(testing::chi_square_p(counts, std::vector<double>(3, 1.0 / 3)), 0.001);
}

TEST(DeterministicWeights, TemplateMustSumToN) {
  Rng rng(12);
  EXPECT_THROW(sample_weights(Deterministic{{2.0, 0.5}}, 2, rng), ConfigError);
  EXPECT_THROW(sample_weights(Deterministic{{1.0, 1.0}}, 3, rng), ConfigError);
}

TEST(KBlocks, SpecExamples) {
  const std::vector<double> w{4, 0, 0, 0};
  EXPECT_EQ(smooth_k_blocks(w, 1, BlockStyle::circular), w);
  EXPECT_EQ(smooth_k_blocks(w, 2, BlockStyle::circular), (std::vector<double>{2, 0, 0, 2}));
  // Moving, k = 2: window {i - 1, i}.
  EXPECT_EQ(smooth_k_blocks(w, 2, BlockStyle::moving), (std::vector<double>{2, 2, 0, 0}));
  EXPECT_THROW(smooth_k_blocks(std::vector<double>{1, 1, 1}, 2, BlockStyle::circular), ConfigError);
}

TEST(KBlocks, SumIsPreserved) {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> w(12);
    for (double& x : w) x = 5.0 * rng.uniform();
    for (int k : {2, 3, 4}) {
      for (BlockStyle s : {BlockStyle::moving, BlockStyle::circular}) {
        EXPECT_NEAR(sum(smooth_k_blocks(w, k, s)), sum(w), 1e-9 * 12);
      }
    }
  }
}

TEST(KBlocks, SchemeDrawsSumToN) {
  Rng rng(14);
  for (int i = 0; i < 500; ++i) EXPECT_NEAR(sum(sample_weights(KBlocks{3}, 12, rng)), 12.0, 1e-9);
  EXPECT_THROW(sample_weights(KBlocks{5}, 12, rng), ConfigError);
}

// Equality in law of (W_1, W_2) and (W_5, W_3) by a two-sample test.
double pair_homogeneity_p(const SchemeConfig& scheme, std::uint64_t seed) {
  Rng rng(seed);
  std::map<std::pair<long, long>, std::size_t> index;
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
  auto slot = [&](double x, double y) {
    const std::pair<long, long> key{std::lround(x * 1e6), std::lround(y * 1e6)};
    auto [it, inserted] = index.emplace(key, a.size());
    if (inserted) {
      a.push_back(0);
      b.push_back(0);
    }
    return it->second;
  };
  for (int i = 0; i < 100000; ++i) {
    const auto w = sample_weights(scheme, 6, rng);
    ++a[slot(w[0], w[1])];
    ++b[slot(w[4], w[2])];
  }
  return testing::two_sample_chi_square_p(a, b);
}

TEST(Exchangeability, PairLawIsPermutationInvariant) {
  const std::vector<SchemeConfig> schemes{
      MOutOfN{1.0},           MOutOfN{0.5},   IidWeighted{{1.0, 2.0}, {0.5, 0.5}},
      Hypergeometric{2},      DeleteH{0.34},  Deterministic{{3, 2, 1, 0, 0, 0}}};
  for (const SchemeConfig& s : schemes) {
    EXPECT_GT(pair_homogeneity_p(s, 15), 0.001) << scheme_name(s);
  }
}

TEST(Exchangeability, SmoothedBlockWeightsAreNotExchangeable) {
  // Neighbouring smoothed weights share underlying counts; (W_1, W_2) and
  // (W_5, W_3) differ in law.
  EXPECT_LT(pair_homogeneity_p(KBlocks{2}, 16), 1e-6);
}

TEST(Schemes, SizesAndNames) {
  EXPECT_EQ(resample_size(MOutOfN{0.5}, 7), 4);
  EXPECT_EQ(resample_size(MOutOfN{0.01}, 7), 1);
  EXPECT_EQ(deleted_count(DeleteH{0.5}, 7), 3);
  EXPECT_EQ(scheme_name(Hypergeometric{3}), "hypergeometric");
  EXPECT_THROW(validate(SchemeConfig(DeleteH{1.0})), ConfigError);
  EXPECT_THROW(validate(SchemeConfig(Hypergeometric{1})), ConfigError);
  EXPECT_THROW(validate(SchemeConfig(MOutOfN{0.0})), ConfigError);
  EXPECT_THROW(validate(SchemeConfig(KBlocks{0})), ConfigError);
}

TEST(Schemes, H1HoldsExactlyForIntegerSchemes) {
  Rng rng(17);
  const std::vector<SchemeConfig> schemes{MOutOfN{1.0}, Hypergeometric{3}, DeleteH{0.5},
                                          Deterministic{{2, 2, 0, 1, 1, 0, 0, 2}}};
  for (const SchemeConfig& s : schemes) {
    for (int i = 0; i < 300; ++i) {
      const auto w = sample_weights(s, 8, rng);
      EXPECT_EQ(sum(w), 8.0) << scheme_name(s);
      for (double x : w) EXPECT_GE(x, 0.0);
    }
  }
}

TEST(Observations, IidFromDiracAndUrnArrangements) {
  Rng rng(18);
  const auto dirac = sample_observations(IidObservations{FiniteMeasure::dirac(3, 2)}, 10, rng);
  for (std::size_t s : dirac) EXPECT_EQ(s, 2u);

  std::vector<std::int64_t> counts(3, 0);  // position of the single b
  for (int i = 0; i < 60000; ++i) {
    const auto x = sample_observations(UrnObservations{{2, 1}}, 3, rng);
    ASSERT_EQ(std::count(x.begin(), x.end(), 1u), 1);
    ++counts[static_cast<std::size_t>(std::find(x.begin(), x.end(), 1u) - x.begin())];
  }
  EXPECT_GT(testing::chi_square_p(counts, std::vector<double>(3, 1.0 / 3)), 0.001);
  EXPECT_THROW(sample_observations(UrnObservations{{2, 2}}, 3, rng), ConfigError);
}

TEST(Observations, CompositionCounts) {
  EXPECT_EQ(composition_counts(FiniteMeasure({0.25, 0.75}), 8), (std::vector<std::int64_t>{2, 6}));
  EXPECT_THROW(composition_counts(FiniteMeasure({0.3, 0.7}), 5), ConfigError);
}

TEST(WeightedEmpirical, AggregatesBySymbol) {
  const std::vector<double> w{2, 0, 1, 1};
  const std::vector<std::size_t> x{0, 1, 1, 2};
  const FiniteMeasure m = weighted_empirical(w, x, 3);
  EXPECT_DOUBLE_EQ(m[0], 0.5);
  EXPECT_DOUBLE_EQ(m[1], 0.25);
  EXPECT_DOUBLE_EQ(m[2], 0.25);
  EXPECT_THROW(weighted_empirical(w, std::vector<std::size_t>{0}, 3), DimensionError);
}

TEST(Samplers, SameSeedSameOutput) {
  for (const SchemeConfig& s : std::vector<SchemeConfig>{MOutOfN{1.0}, Hypergeometric{2},
                                                         IidWeighted{{0.5, 2.0}, {0.5, 0.5}}}) {
    Rng a(99);
    Rng b(99);
    EXPECT_EQ(sample_weights(s, 10, a), sample_weights(s, 10, b));
  }
}

}  // namespace
}  // namespace ldboot
