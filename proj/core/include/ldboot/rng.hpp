#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ldboot {

/// xoshiro256** seeded through splitmix64.
///
/// Every sampler in the library takes an explicit `Rng&`; nothing draws from
/// global state. The generator and all distributions below are implemented
/// here rather than taken from <random> because the standard distributions
/// are implementation-defined, and same-seed output must be identical across
/// platforms.
///
/// Stream derivation: `Rng::stream(seed, a, b)` seeds a fresh generator from
/// splitmix64(splitmix64(seed ^ mix(a)) ^ mix(b)). The Monte Carlo harness
/// uses a = experiment component (weights, observations), b = block index.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x5eed'1e55'ba5e'ba11ULL);

  /// Independent generator for stream (a, b) of a root seed.
  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t x);

// Portable exact discrete samplers. All use inversion started at the mode,
// so expected cost is O(standard deviation).

std::int64_t sample_binomial(Rng& rng, std::int64_t trials, double p);
std::int64_t sample_poisson(Rng& rng, double mean);

/// Number of marked items in `draws` draws without replacement from a
/// population of `population` items of which `marked` are marked.
std::int64_t sample_hypergeometric(Rng& rng, std::int64_t population,
                                   std::int64_t marked, std::int64_t draws);

/// Multinomial counts by sequential binomial conditionals. `probs` need not
/// be normalized; zero entries receive zero counts.
std::vector<std::int64_t> sample_multinomial(Rng& rng, std::int64_t trials,
                                             std::span<const double> probs);

/// Index drawn from an unnormalized nonnegative weight vector.
std::size_t sample_categorical(Rng& rng, std::span<const double> weights);

/// Fisher-Yates with the library generator.
template <typename T>
void shuffle(Rng& rng, std::span<T> values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    using std::swap;
    swap(values[i - 1], values[j]);
  }
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& values) {
  shuffle(rng, std::span<T>(values));
}

}  // namespace ldboot
