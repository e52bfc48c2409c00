#include "ldboot/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

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

void require_positive_n(std::int64_t n, const char* op) {
  if (n < 1) throw DomainError(std::string(op) + ": n must be at least 1");
}

std::vector<std::int64_t> uniform_multinomial(std::int64_t n, std::int64_t m, Rng& rng) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  std::int64_t remaining = m;
  for (std::int64_t i = 0; i + 1 < n && remaining > 0; ++i) {
    const double p = 1.0 / static_cast<double>(n - i);
    counts[static_cast<std::size_t>(i)] = sample_binomial(rng, remaining, p);
    remaining -= counts[static_cast<std::size_t>(i)];
  }
  counts.back() += remaining;
  return counts;
}

}  // namespace

void validate(const SchemeConfig& scheme) {
  std::visit(
      overloaded{
          [](const MOutOfN& s) {
            if (!(s.lambda > 0.0) || !std::isfinite(s.lambda)) {
              throw ConfigError("m_out_of_n: lambda must be positive");
            }
          },
          [](const IidWeighted& s) {
            if (s.grid.empty() || s.grid.size() != s.probs.size()) {
              throw ConfigError("iid_weighted: grid and probs must be nonempty, equal length");
            }
            double total = 0.0;
            for (std::size_t i = 0; i < s.grid.size(); ++i) {
              if (!(s.grid[i] > 0.0) || !std::isfinite(s.grid[i])) {
                throw ConfigError(
                    "iid_weighted: grid must be strictly positive (a zero weight makes "
                    "Lambda*(0) finite)");
              }
              if (!(s.probs[i] >= 0.0)) throw ConfigError("iid_weighted: negative probability");
              total += s.probs[i];
            }
            if (std::abs(total - 1.0) > 1e-9) {
              throw ConfigError("iid_weighted: probabilities must sum to 1");
            }
          },
          [](const Hypergeometric& s) {
            if (s.K < 2) throw ConfigError("hypergeometric: K must be at least 2");
          },
          [](const Deterministic& s) {
            if (s.atoms.empty()) throw ConfigError("deterministic: empty template");
            double total = 0.0;
            for (double a : s.atoms) {
              if (!(a >= 0.0) || !std::isfinite(a)) {
                throw ConfigError("deterministic: template atoms must be nonnegative");
              }
              total += a;
            }
            const auto n = static_cast<double>(s.atoms.size());
            if (std::abs(total - n) > 1e-9 * n) {
              throw ConfigError("deterministic: template must sum to n = " + format_double(n) +
                                " (got " + format_double(total) + ")");
            }
          },
          [](const DeleteH& s) {
            if (!(s.alpha >= 0.0 && s.alpha < 1.0)) {
              throw ConfigError("delete_h: alpha must lie in [0, 1)");
            }
          },
          [](const KBlocks& s) {
            if (s.k < 1) throw ConfigError("k_blocks: k must be at least 1");
          },
      },
      scheme);
}

std::string scheme_name(const SchemeConfig& scheme) {
  return std::visit(
      overloaded{
          [](const MOutOfN&) { return std::string("m_out_of_n"); },
          [](const IidWeighted&) { return std::string("iid_weighted"); },
          [](const Hypergeometric&) { return std::string("hypergeometric"); },
          [](const Deterministic&) { return std::string("deterministic"); },
          [](const DeleteH&) { return std::string("delete_h"); },
          [](const KBlocks&) { return std::string("k_blocks"); },
      },
      scheme);
}

std::int64_t resample_size(const MOutOfN& scheme, std::int64_t n) {
  return std::max<std::int64_t>(1, std::llround(scheme.lambda * static_cast<double>(n)));
}

std::int64_t deleted_count(const DeleteH& scheme, std::int64_t n) {
  // The epsilon keeps alpha * n = 2.9999999 from rounding down to 2.
  const auto h = static_cast<std::int64_t>(
      std::floor(scheme.alpha * static_cast<double>(n) + 1e-9));
  return std::min(h, n - 1);
}

std::vector<double> sample_multinomial_weights(std::int64_t n, std::int64_t m, Rng& rng) {
  require_positive_n(n, "sample_multinomial_weights");
  if (m < 1) throw DomainError("sample_multinomial_weights: m must be at least 1");
  const auto counts = uniform_multinomial(n, m, rng);
  std::vector<double> w(counts.size());
  const auto scale_num = static_cast<double>(n);
  const auto scale_den = static_cast<double>(m);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = scale_num * static_cast<double>(counts[i]) / scale_den;
  }
  return w;
}

CouplingOutcome couple_poisson_multinomial(std::int64_t n, std::int64_t m, Rng& rng) {
  require_positive_n(n, "couple_poisson_multinomial");
  if (m < 1) throw DomainError("couple_poisson_multinomial: m must be at least 1");
  CouplingOutcome out;
  out.z.resize(static_cast<std::size_t>(n));
  const double rate = static_cast<double>(m) / static_cast<double>(n);
  for (auto& z : out.z) z = sample_poisson(rng, rate);
  out.m = out.z;
  std::int64_t balls = std::accumulate(out.z.begin(), out.z.end(), std::int64_t{0});
  out.moved_mass = std::abs(balls - m);

  // Excess: remove balls one at a time, each uniform over the remaining balls.
  while (balls > m) {
    auto pick = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(balls)));
    for (auto& count : out.m) {
      if (pick < count) {
        --count;
        break;
      }
      pick -= count;
    }
    --balls;
  }
  // Deficit: each added ball picks an urn uniformly.
  while (balls < m) {
    ++out.m[rng.uniform_index(static_cast<std::uint64_t>(n))];
    ++balls;
  }
  return out;
}

std::vector<double> sample_iid_weights(std::int64_t n, const IidWeighted& law, Rng& rng) {
  require_positive_n(n, "sample_iid_weights");
  validate(SchemeConfig(law));
  std::vector<double> y(static_cast<std::size_t>(n));
  for (double& v : y) v = law.grid[sample_categorical(rng, law.probs)];
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  for (double& v : y) v /= mean;
  return y;
}

std::vector<double> sample_hypergeometric_weights(std::int64_t n, int K, Rng& rng) {
  require_positive_n(n, "sample_hypergeometric_weights");
  if (K < 2) throw DomainError("sample_hypergeometric_weights: K must be at least 2");
  std::vector<double> w(static_cast<std::size_t>(n));
  std::int64_t population = n * K;
  std::int64_t draws = n;
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    const std::int64_t k = sample_hypergeometric(rng, population, K, draws);
    w[static_cast<std::size_t>(i)] = static_cast<double>(k);
    draws -= k;
    population -= K;
  }
  w.back() = static_cast<double>(draws);
  return w;
}

std::vector<double> sample_jackknife_weights(std::int64_t n, std::int64_t h, Rng& rng) {
  require_positive_n(n, "sample_jackknife_weights");
  if (h < 0 || h >= n) throw DomainError("sample_jackknife_weights: need 0 <= h < n");
  const double kept = static_cast<double>(n) / static_cast<double>(n - h);
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  std::fill(w.begin(), w.begin() + (n - h), kept);
  shuffle(rng, w);
  return w;
}

std::vector<double> sample_deterministic_weights(std::span<const double> atoms, Rng& rng) {
  validate(SchemeConfig(Deterministic{std::vector<double>(atoms.begin(), atoms.end())}));
  std::vector<double> w(atoms.begin(), atoms.end());
  shuffle(rng, w);
  return w;
}

std::vector<double> smooth_k_blocks(std::span<const double> weights, int k, BlockStyle style) {
  if (k < 1) throw ConfigError("smooth_k_blocks: k must be at least 1");
  const auto n = static_cast<std::int64_t>(weights.size());
  if (n == 0 || n % k != 0) {
    throw ConfigError("smooth_k_blocks: n = " + std::to_string(n) +
                      " is not divisible by k = " + std::to_string(k));
  }
  if (k == 1) return {weights.begin(), weights.end()};
  const std::int64_t first = style == BlockStyle::circular ? 0 : -(k / 2);
  std::vector<double> out(weights.size(), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::int64_t t = 0; t < k; ++t) {
      const std::int64_t j = ((i + first + t) % n + n) % n;
      acc += weights[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = acc / k;
  }
  return out;
}

std::vector<double> sample_weights(const SchemeConfig& scheme, std::int64_t n, Rng& rng) {
  require_positive_n(n, "sample_weights");
  return std::visit(
      overloaded{
          [&](const MOutOfN& s) {
            return sample_multinomial_weights(n, resample_size(s, n), rng);
          },
          [&](const IidWeighted& s) { return sample_iid_weights(n, s, rng); },
          [&](const Hypergeometric& s) { return sample_hypergeometric_weights(n, s.K, rng); },
          [&](const Deterministic& s) {
            if (static_cast<std::int64_t>(s.atoms.size()) != n) {
              throw ConfigError("deterministic: template has " + std::to_string(s.atoms.size()) +
                                " atoms but n = " + std::to_string(n));
            }
            return sample_deterministic_weights(s.atoms, rng);
          },
          [&](const DeleteH& s) {
            validate(SchemeConfig(s));
            return sample_jackknife_weights(n, deleted_count(s, n), rng);
          },
          [&](const KBlocks& s) {
            if (s.k < 1 || n % s.k != 0) {
              throw ConfigError("k_blocks: n = " + std::to_string(n) +
                                " is not divisible by k = " + std::to_string(s.k));
            }
            const auto counts = uniform_multinomial(n, n / s.k, rng);
            std::vector<double> w(counts.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
              w[i] = static_cast<double>(s.k * counts[i]);
            }
            return smooth_k_blocks(w, s.k, s.style);
          },
      },
      scheme);
}

std::vector<std::size_t> sample_observations(const ObservationMode& mode, std::int64_t n,
                                             Rng& rng) {
  require_positive_n(n, "sample_observations");
  return std::visit(
      overloaded{
          [&](const IidObservations& iid) {
            if (!iid.law.is_probability()) {
              throw ConfigError("sample_observations: law must be a probability");
            }
            std::vector<std::size_t> x(static_cast<std::size_t>(n));
            for (auto& v : x) v = sample_categorical(rng, iid.law.mass());
            return x;
          },
          [&](const UrnObservations& urn) {
            std::int64_t total = 0;
            for (auto c : urn.counts) {
              if (c < 0) throw ConfigError("sample_observations: negative urn count");
              total += c;
            }
            if (total != n) {
              throw ConfigError("sample_observations: urn holds " + std::to_string(total) +
                                " items but n = " + std::to_string(n));
            }
            std::vector<std::size_t> x;
            x.reserve(static_cast<std::size_t>(n));
            for (std::size_t s = 0; s < urn.counts.size(); ++s) {
              x.insert(x.end(), static_cast<std::size_t>(urn.counts[s]), s);
            }
            shuffle(rng, x);
            return x;
          },
      },
      mode);
}

std::vector<std::int64_t> composition_counts(const FiniteMeasure& law, std::int64_t n) {
  if (!law.is_probability()) throw ConfigError("composition_counts: law must be a probability");
  std::vector<std::int64_t> counts(law.alphabet_size());
  std::int64_t total = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    const double exact = law[s] * static_cast<double>(n);
    counts[s] = std::llround(exact);
    if (std::abs(exact - static_cast<double>(counts[s])) > 1e-9 * std::max<double>(1.0, n)) {
      throw ConfigError("composition_counts: n = " + std::to_string(n) +
                        " times the observation law is not integral");
    }
    total += counts[s];
  }
  if (total != n) throw ConfigError("composition_counts: counts do not sum to n");
  return counts;
}

FiniteMeasure weighted_empirical(std::span<const double> weights,
                                 std::span<const std::size_t> symbols,
                                 std::size_t alphabet_size) {
  if (weights.size() != symbols.size()) {
    throw DimensionError("weighted_empirical: weights and symbols differ in length");
  }
  std::vector<double> m(alphabet_size, 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) m.at(symbols[i]) += weights[i];
  const auto n = static_cast<double>(weights.size());
  for (double& v : m) v /= n;
  return FiniteMeasure(std::move(m));
}

}  // namespace ldboot
