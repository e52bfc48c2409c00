#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ldboot/measures.hpp"
#include "ldboot/rng.hpp"

namespace ldboot {

/// "m out of n" bootstrap; Efron's when lambda = 1. The per-n resample size
/// is m(n) = max(1, round(lambda * n)).
struct MOutOfN {
  double lambda = 1.0;
};

/// Weights Y_i / mean(Y) with Y_i iid from a strictly positive finite law.
struct IidWeighted {
  std::vector<double> grid;
  std::vector<double> probs;
};

/// n draws without replacement from an urn holding K copies of each label.
struct Hypergeometric {
  int K = 2;
};

/// Uniform permutation of a fixed template summing to n.
struct Deterministic {
  std::vector<double> atoms;
};

/// Delete-h jackknife with h(n) = floor(alpha * n).
struct DeleteH {
  double alpha = 0.0;
};

enum class BlockStyle { moving, circular };

/// k-blocks bootstrap: m = n/k out of n multinomial weights scaled by k,
/// then smoothed over blocks of k consecutive indices.
struct KBlocks {
  int k = 1;
  BlockStyle style = BlockStyle::circular;
};

using SchemeConfig =
    std::variant<MOutOfN, IidWeighted, Hypergeometric, Deterministic, DeleteH, KBlocks>;

/// Throws ConfigError when the parameters are outside their domain.
void validate(const SchemeConfig& scheme);
std::string scheme_name(const SchemeConfig& scheme);

std::int64_t resample_size(const MOutOfN& scheme, std::int64_t n);
std::int64_t deleted_count(const DeleteH& scheme, std::int64_t n);

/// Poisson draws and the multinomial vector coupled to them.
struct CouplingOutcome {
  std::vector<std::int64_t> z;
  std::vector<std::int64_t> m;
  std::int64_t moved_mass = 0;  ///< |sum z - m|
};

/// W_i = (n/m) M_i with M ~ Multinomial(m, uniform over n cells).
std::vector<double> sample_multinomial_weights(std::int64_t n, std::int64_t m, Rng& rng);

/// Z_i iid Poisson(m/n); balls are then removed uniformly at random (without
/// replacement) or added to uniform urns until exactly m remain.
CouplingOutcome couple_poisson_multinomial(std::int64_t n, std::int64_t m, Rng& rng);

std::vector<double> sample_iid_weights(std::int64_t n, const IidWeighted& law, Rng& rng);

/// Integer weights in {0..K} summing to n, by sequential conditional
/// hypergeometric draws.
std::vector<double> sample_hypergeometric_weights(std::int64_t n, int K, Rng& rng);

/// Random arrangement of (n/(n-h)) x (n-h) and 0 x h.
std::vector<double> sample_jackknife_weights(std::int64_t n, std::int64_t h, Rng& rng);

std::vector<double> sample_deterministic_weights(std::span<const double> atoms, Rng& rng);

/// Wtilde_i = (1/k) sum_{j ~ i} W_j with indices modulo n. Circular blocks
/// are {i, ..., i+k-1}; moving blocks are {i - floor(k/2), ..., i + ceil(k/2) - 1}.
std::vector<double> smooth_k_blocks(std::span<const double> weights, int k, BlockStyle style);

/// One exchangeable weight vector of length n for the scheme.
std::vector<double> sample_weights(const SchemeConfig& scheme, std::int64_t n, Rng& rng);

/// Observation sampling mode: iid from a law, or a uniformly random
/// arrangement of a fixed urn.
struct IidObservations {
  FiniteMeasure law;
};
struct UrnObservations {
  std::vector<std::int64_t> counts;  ///< per-symbol counts, summing to n
};
using ObservationMode = std::variant<IidObservations, UrnObservations>;

std::vector<std::size_t> sample_observations(const ObservationMode& mode, std::int64_t n,
                                             Rng& rng);

/// Symbol counts with empirical measure equal to `law` at size n. Throws
/// ConfigError when n * law is not integral (to 1e-9).
std::vector<std::int64_t> composition_counts(const FiniteMeasure& law, std::int64_t n);

/// Weighted empirical measure (1/n) sum_i w_i delta_{x_i}.
FiniteMeasure weighted_empirical(std::span<const double> weights,
                                 std::span<const std::size_t> symbols,
                                 std::size_t alphabet_size);

}  // namespace ldboot
