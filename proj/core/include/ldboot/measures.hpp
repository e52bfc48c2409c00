#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ldboot/extended.hpp"
#include "ldboot/rng.hpp"

namespace ldboot {

/// Tolerance of the probability() predicate.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Nonnegative masses on the indexed alphabet {0, ..., s-1}.
class FiniteMeasure {
 public:
  FiniteMeasure() = default;
  explicit FiniteMeasure(std::vector<double> mass);

  static FiniteMeasure uniform(std::size_t alphabet_size);
  static FiniteMeasure dirac(std::size_t alphabet_size, std::size_t symbol);

  [[nodiscard]] std::size_t alphabet_size() const { return mass_.size(); }
  [[nodiscard]] std::span<const double> mass() const { return mass_; }
  [[nodiscard]] const std::vector<double>& values() const { return mass_; }
  [[nodiscard]] double operator[](std::size_t i) const { return mass_[i]; }
  [[nodiscard]] double total() const { return total_; }
  [[nodiscard]] bool is_probability() const;

  /// Same direction with total one. Throws DomainError on a zero measure.
  [[nodiscard]] FiniteMeasure normalized() const;

  friend bool operator==(const FiniteMeasure&, const FiniteMeasure&) = default;

 private:
  std::vector<double> mass_;
  double total_ = 0.0;
};

/// t * a + (1 - t) * b.
FiniteMeasure mix(double t, const FiniteMeasure& a, const FiniteMeasure& b);

/// n atoms of mass 1/n each at the given nonnegative positions on the
/// half-line. Holds weight empirical measures.
class AtomicWeightMeasure {
 public:
  AtomicWeightMeasure() = default;
  explicit AtomicWeightMeasure(std::vector<double> atoms);

  [[nodiscard]] std::size_t n() const { return atoms_.size(); }
  [[nodiscard]] std::span<const double> atoms() const { return atoms_; }
  [[nodiscard]] const std::vector<double>& values() const { return atoms_; }
  [[nodiscard]] double sum() const;
  [[nodiscard]] double mean() const;
  /// |sum / n - 1| <= 1e-9, the normalization every weight sampler obeys.
  [[nodiscard]] bool has_mean_one() const;

 private:
  std::vector<double> atoms_;
};

/// Row-major nonnegative matrix on (weight grid) x (alphabet).
class JointFiniteMeasure {
 public:
  JointFiniteMeasure() = default;
  JointFiniteMeasure(std::vector<double> weight_grid, std::size_t cols,
                     std::vector<double> mass);

  [[nodiscard]] std::size_t rows() const { return weight_grid_.size(); }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::span<const double> weight_grid() const { return weight_grid_; }
  [[nodiscard]] std::span<const double> mass() const { return mass_; }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return mass_[row * cols_ + col];
  }

  /// Law of the weight coordinate (indexed by grid position).
  [[nodiscard]] FiniteMeasure first_marginal() const;
  /// Law of the symbol coordinate.
  [[nodiscard]] FiniteMeasure second_marginal() const;
  /// Sum over the grid of w * first_marginal(w).
  [[nodiscard]] double first_moment() const;
  /// Membership in the mean-one set: first_moment() within 1e-9 of one.
  [[nodiscard]] bool has_mean_one_weights() const;
  /// The contraction map: symbol x gets sum_w w * mass(w, x).
  [[nodiscard]] FiniteMeasure weighted_projection() const;

 private:
  std::vector<double> weight_grid_;
  std::size_t cols_ = 0;
  std::vector<double> mass_;
};

/// Conditional laws over a shared weight grid, one per alphabet symbol.
class Kernel {
 public:
  Kernel() = default;
  Kernel(std::vector<double> weight_grid, std::vector<FiniteMeasure> slices);

  [[nodiscard]] std::span<const double> weight_grid() const { return weight_grid_; }
  [[nodiscard]] std::size_t alphabet_size() const { return slices_.size(); }
  [[nodiscard]] const FiniteMeasure& slice(std::size_t symbol) const {
    return slices_[symbol];
  }
  /// Mean weight under the slice of `symbol`.
  [[nodiscard]] double slice_mean(std::size_t symbol) const;

  /// Joint law slice(x)(w) * mu(x).
  [[nodiscard]] JointFiniteMeasure compose(const FiniteMeasure& mu) const;

 private:
  std::vector<double> weight_grid_;
  std::vector<FiniteMeasure> slices_;
};

/// H(nu | mu) in nats with 0 ln 0 = 0 and +inf when nu is not absolutely
/// continuous with respect to mu.
ExtendedReal relative_entropy(const FiniteMeasure& nu, const FiniteMeasure& mu);

/// Both sides of the entropy chain rule for joints sharing a first marginal.
struct ChainRuleTerms {
  ExtendedReal direct;      ///< H(joint | ref)
  ExtendedReal integrated;  ///< sum_w theta(w) H(joint_w | ref_w)
};

/// Throws ContractError unless the first marginals agree cell-wise to 1e-9.
ChainRuleTerms entropy_chain_check(const JointFiniteMeasure& joint,
                                   const JointFiniteMeasure& ref);

/// W1 on the line between equal-size atomic measures, via sorted quantiles.
double w1_line(const AtomicWeightMeasure& a, const AtomicWeightMeasure& b);

/// (1/2) sum |nu_i - mu_i|.
double tv_distance(const FiniteMeasure& nu, const FiniteMeasure& mu);

/// |x - y| / (1 + |x - y|).
double bounded_metric(double x, double y);

/// Add or remove mass uniformly at random until the atoms sum to n.
///
/// Excess mass is removed in chunks, each taken from a cell chosen with
/// probability proportional to its current mass (a uniform point of the
/// mass). Deficits are added in chunks to uniformly chosen cells. Every cell
/// moves in the same direction, so W1(input, output) <= |mean(input) - 1|.
AtomicWeightMeasure rebalance_atoms(const AtomicWeightMeasure& a, Rng& rng);

/// Law of X / m when X has law `a`.
AtomicWeightMeasure push_forward_scale(const AtomicWeightMeasure& a, double m);

/// Plot-ready CSV: header line then one row per entry.
void write_csv(std::ostream& os, const FiniteMeasure& measure);
void write_csv(std::ostream& os, const AtomicWeightMeasure& measure);

}  // namespace ldboot
