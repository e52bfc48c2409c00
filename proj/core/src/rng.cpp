#include "ldboot/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ldboot/errors.hpp"

namespace ldboot {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// Inversion that visits the support in the order mode, mode+1, mode-1,
// mode+2, ... `ratio_up(k)` = pmf(k+1)/pmf(k), `ratio_down(k)` =
// pmf(k-1)/pmf(k). Bounds are inclusive; hi may be INT64_MAX for unbounded
// support.
template <typename Up, typename Down>
std::int64_t inversion_from_mode(Rng& rng, std::int64_t lo, std::int64_t hi,
                                 std::int64_t mode, double pmf_mode,
                                 Up ratio_up, Down ratio_down) {
  double u = rng.uniform();
  u -= pmf_mode;
  if (u < 0.0) return mode;
  std::int64_t up = mode;
  std::int64_t down = mode;
  double p_up = pmf_mode;
  double p_down = pmf_mode;
  bool up_open = up < hi;
  bool down_open = down > lo;
  while (up_open || down_open) {
    if (up_open) {
      p_up *= ratio_up(up);
      ++up;
      u -= p_up;
      if (u < 0.0) return up;
      up_open = up < hi && p_up > 0.0;
    }
    if (down_open) {
      p_down *= ratio_down(down);
      --down;
      u -= p_down;
      if (u < 0.0) return down;
      down_open = down > lo && p_down > 0.0;
    }
  }
  // Only reachable through accumulated rounding in the pmf sum.
  return mode;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    word = z ^ (z >> 31);
  }
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t first = splitmix64(seed ^ splitmix64(a + 0x632be59bd9b4e019ULL));
  return Rng(splitmix64(first ^ splitmix64(b + 0x8cb92ba72f3d8dd7ULL)));
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw DomainError("uniform_index: bound must be positive");
  // Lemire's nearly-divisionless rejection.
  __extension__ using u128 = unsigned __int128;
  u128 product = static_cast<u128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

std::int64_t sample_binomial(Rng& rng, std::int64_t trials, double p) {
  if (trials < 0 || !(p >= 0.0 && p <= 1.0)) {
    throw DomainError("sample_binomial: need trials >= 0 and p in [0,1]");
  }
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  const auto n = static_cast<double>(trials);
  auto mode = static_cast<std::int64_t>(std::floor((n + 1.0) * p));
  mode = std::min(mode, trials);
  const double k = static_cast<double>(mode);
  const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                         std::lgamma(n - k + 1.0) + k * std::log(p) +
                         (n - k) * std::log1p(-p);
  const double odds = p / (1.0 - p);
  return inversion_from_mode(
      rng, 0, trials, mode, std::exp(log_pmf),
      [&](std::int64_t j) {
        return (n - static_cast<double>(j)) / (static_cast<double>(j) + 1.0) * odds;
      },
      [&](std::int64_t j) {
        return static_cast<double>(j) / (n - static_cast<double>(j) + 1.0) / odds;
      });
}

std::int64_t sample_poisson(Rng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("sample_poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  const auto mode = static_cast<std::int64_t>(std::floor(mean));
  const double k = static_cast<double>(mode);
  const double log_pmf = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
  return inversion_from_mode(
      rng, 0, std::numeric_limits<std::int64_t>::max(), mode,
      std::exp(log_pmf),
      [&](std::int64_t j) { return mean / (static_cast<double>(j) + 1.0); },
      [&](std::int64_t j) { return static_cast<double>(j) / mean; });
}

std::int64_t sample_hypergeometric(Rng& rng, std::int64_t population,
                                   std::int64_t marked, std::int64_t draws) {
  if (population < 0 || marked < 0 || draws < 0 || marked > population ||
      draws > population) {
    throw DomainError("sample_hypergeometric: inconsistent urn");
  }
  const std::int64_t lo = std::max<std::int64_t>(0, draws - (population - marked));
  const std::int64_t hi = std::min(draws, marked);
  if (lo == hi) return lo;
  const double N = static_cast<double>(population);
  const double K = static_cast<double>(marked);
  const double r = static_cast<double>(draws);
  auto mode = static_cast<std::int64_t>(std::floor((r + 1.0) * (K + 1.0) / (N + 2.0)));
  mode = std::clamp(mode, lo, hi);
  const double k = static_cast<double>(mode);
  auto log_choose = [](double a, double b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  const double log_pmf =
      log_choose(K, k) + log_choose(N - K, r - k) - log_choose(N, r);
  return inversion_from_mode(
      rng, lo, hi, mode, std::exp(log_pmf),
      [&](std::int64_t j) {
        const double x = static_cast<double>(j);
        return (K - x) * (r - x) / ((x + 1.0) * (N - K - r + x + 1.0));
      },
      [&](std::int64_t j) {
        const double x = static_cast<double>(j);
        return x * (N - K - r + x) / ((K - x + 1.0) * (r - x + 1.0));
      });
}

std::vector<std::int64_t> sample_multinomial(Rng& rng, std::int64_t trials,
                                             std::span<const double> probs) {
  std::vector<std::int64_t> counts(probs.size(), 0);
  double remaining_mass = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError("sample_multinomial: negative weight");
    remaining_mass += p;
  }
  if (trials > 0 && !(remaining_mass > 0.0)) {
    throw DomainError("sample_multinomial: weights sum to zero");
  }
  std::int64_t remaining = trials;
  // Index of the last positive weight absorbs the remainder exactly.
  std::size_t last = probs.size();
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) {
      last = i;
      break;
    }
  }
  for (std::size_t i = 0; i < probs.size() && remaining > 0; ++i) {
    if (probs[i] <= 0.0) continue;
    if (i == last) {
      counts[i] = remaining;
      remaining = 0;
      break;
    }
    const double p = std::min(1.0, probs[i] / remaining_mass);
    counts[i] = sample_binomial(rng, remaining, p);
    remaining -= counts[i];
    remaining_mass -= probs[i];
  }
  return counts;
}

std::size_t sample_categorical(Rng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("sample_categorical: zero total weight");
  double u = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return last_positive;
}

}  // namespace ldboot
