#include "ldboot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "ldboot/errors.hpp"
#include "ldboot/format.hpp"

namespace ldboot {

namespace {

void require_same_alphabet(const FiniteMeasure& a, const FiniteMeasure& b,
                           const char* op) {
  if (a.alphabet_size() != b.alphabet_size()) {
    throw DimensionError(std::string(op) + ": alphabet sizes differ (" +
                         std::to_string(a.alphabet_size()) + " vs " +
                         std::to_string(b.alphabet_size()) + ")");
  }
}

void require_probability(const FiniteMeasure& m, const char* op) {
  if (!m.is_probability()) {
    throw DomainError(std::string(op) + ": argument is not a probability (total " +
                      format_double(m.total()) + ")");
  }
}

// Terms of sum p ln(p/q) over unnormalized vectors.
ExtendedReal entropy_sum(std::span<const double> p, std::span<const double> q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return ExtendedReal::infinity();
    acc += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave -1e-17 for identical inputs.
  return ExtendedReal(std::max(acc, 0.0));
}

}  // namespace

FiniteMeasure::FiniteMeasure(std::vector<double> mass) : mass_(std::move(mass)) {
  if (mass_.empty()) throw DomainError("FiniteMeasure: empty alphabet");
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw DomainError("FiniteMeasure: masses must be finite and nonnegative");
    }
  }
  total_ = std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

FiniteMeasure FiniteMeasure::uniform(std::size_t alphabet_size) {
  if (alphabet_size == 0) throw DomainError("FiniteMeasure: empty alphabet");
  return FiniteMeasure(std::vector<double>(alphabet_size, 1.0 / static_cast<double>(alphabet_size)));
}

FiniteMeasure FiniteMeasure::dirac(std::size_t alphabet_size, std::size_t symbol) {
  if (symbol >= alphabet_size) throw DomainError("FiniteMeasure::dirac: symbol out of range");
  std::vector<double> m(alphabet_size, 0.0);
  m[symbol] = 1.0;
  return FiniteMeasure(std::move(m));
}

bool FiniteMeasure::is_probability() const {
  return std::abs(total_ - 1.0) <= kProbabilityTolerance;
}

FiniteMeasure FiniteMeasure::normalized() const {
  if (!(total_ > 0.0)) throw DomainError("FiniteMeasure::normalized: zero measure");
  std::vector<double> m(mass_);
  for (double& v : m) v /= total_;
  return FiniteMeasure(std::move(m));
}

FiniteMeasure mix(double t, const FiniteMeasure& a, const FiniteMeasure& b) {
  require_same_alphabet(a, b, "mix");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("mix: t must lie in [0,1]");
  std::vector<double> m(a.alphabet_size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = t * a[i] + (1.0 - t) * b[i];
  return FiniteMeasure(std::move(m));
}

AtomicWeightMeasure::AtomicWeightMeasure(std::vector<double> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("AtomicWeightMeasure: needs at least one atom");
  for (double a : atoms_) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw DomainError("AtomicWeightMeasure: atoms must be finite and nonnegative");
    }
  }
}

double AtomicWeightMeasure::sum() const {
  return std::accumulate(atoms_.begin(), atoms_.end(), 0.0);
}

double AtomicWeightMeasure::mean() const {
  return sum() / static_cast<double>(atoms_.size());
}

bool AtomicWeightMeasure::has_mean_one() const {
  return std::abs(mean() - 1.0) <= 1e-9;
}

JointFiniteMeasure::JointFiniteMeasure(std::vector<double> weight_grid,
                                       std::size_t cols, std::vector<double> mass)
    : weight_grid_(std::move(weight_grid)), cols_(cols), mass_(std::move(mass)) {
  if (weight_grid_.empty() || cols_ == 0) {
    throw DomainError("JointFiniteMeasure: empty grid or alphabet");
  }
  if (mass_.size() != weight_grid_.size() * cols_) {
    throw DimensionError("JointFiniteMeasure: mass must have rows*cols entries");
  }
  for (double w : weight_grid_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("JointFiniteMeasure: weight grid must lie in [0, inf)");
    }
  }
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw DomainError("JointFiniteMeasure: masses must be finite and nonnegative");
    }
  }
}

FiniteMeasure JointFiniteMeasure::first_marginal() const {
  std::vector<double> m(rows(), 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m[r] += at(r, c);
  }
  return FiniteMeasure(std::move(m));
}

FiniteMeasure JointFiniteMeasure::second_marginal() const {
  std::vector<double> m(cols_, 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m[c] += at(r, c);
  }
  return FiniteMeasure(std::move(m));
}

double JointFiniteMeasure::first_moment() const {
  const FiniteMeasure theta = first_marginal();
  double acc = 0.0;
  for (std::size_t r = 0; r < rows(); ++r) acc += weight_grid_[r] * theta[r];
  return acc;
}

bool JointFiniteMeasure::has_mean_one_weights() const {
  return std::abs(first_moment() - 1.0) <= 1e-9;
}

FiniteMeasure JointFiniteMeasure::weighted_projection() const {
  std::vector<double> m(cols_, 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m[c] += weight_grid_[r] * at(r, c);
  }
  return FiniteMeasure(std::move(m));
}

Kernel::Kernel(std::vector<double> weight_grid, std::vector<FiniteMeasure> slices)
    : weight_grid_(std::move(weight_grid)), slices_(std::move(slices)) {
  for (const auto& s : slices_) {
    if (s.alphabet_size() != weight_grid_.size()) {
      throw DimensionError("Kernel: slice size differs from weight grid size");
    }
    if (!s.is_probability()) throw DomainError("Kernel: every slice must be a probability");
  }
}

double Kernel::slice_mean(std::size_t symbol) const {
  const auto& s = slices_.at(symbol);
  double acc = 0.0;
  for (std::size_t r = 0; r < weight_grid_.size(); ++r) acc += weight_grid_[r] * s[r];
  return acc;
}

JointFiniteMeasure Kernel::compose(const FiniteMeasure& mu) const {
  if (mu.alphabet_size() != slices_.size()) {
    throw DimensionError("Kernel::compose: alphabet size mismatch");
  }
  const std::size_t rows = weight_grid_.size();
  const std::size_t cols = slices_.size();
  std::vector<double> m(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m[r * cols + c] = slices_[c][r] * mu[c];
  }
  return JointFiniteMeasure(weight_grid_, cols, std::move(m));
}

ExtendedReal relative_entropy(const FiniteMeasure& nu, const FiniteMeasure& mu) {
  require_same_alphabet(nu, mu, "relative_entropy");
  require_probability(nu, "relative_entropy");
  require_probability(mu, "relative_entropy");
  return entropy_sum(nu.mass(), mu.mass());
}

ChainRuleTerms entropy_chain_check(const JointFiniteMeasure& joint,
                                   const JointFiniteMeasure& ref) {
  if (joint.rows() != ref.rows() || joint.cols() != ref.cols()) {
    throw DimensionError("entropy_chain_check: joint shapes differ");
  }
  const FiniteMeasure theta = joint.first_marginal();
  const FiniteMeasure theta_ref = ref.first_marginal();
  if (!theta.is_probability() || !theta_ref.is_probability()) {
    throw DomainError("entropy_chain_check: joints must be probabilities");
  }
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    if (std::abs(theta[r] - theta_ref[r]) > 1e-9) {
      throw ContractError("entropy_chain_check: first marginals differ at row " +
                          std::to_string(r));
    }
  }

  ChainRuleTerms out;
  out.direct = entropy_sum(joint.mass(), ref.mass());

  ExtendedReal integrated(0.0);
  const std::size_t cols = joint.cols();
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    if (theta[r] <= 0.0) continue;
    std::vector<double> p(cols);
    std::vector<double> q(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      p[c] = joint.at(r, c) / theta[r];
      q[c] = theta_ref[r] > 0.0 ? ref.at(r, c) / theta_ref[r] : 0.0;
    }
    integrated += theta[r] * entropy_sum(p, q);
  }
  out.integrated = integrated;
  return out;
}

double w1_line(const AtomicWeightMeasure& a, const AtomicWeightMeasure& b) {
  if (a.n() != b.n()) {
    throw UnsupportedError("w1_line: only equal atom counts are supported (" +
                           std::to_string(a.n()) + " vs " + std::to_string(b.n()) + ")");
  }
  std::vector<double> x(a.values());
  std::vector<double> y(b.values());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
  return acc / static_cast<double>(x.size());
}

double tv_distance(const FiniteMeasure& nu, const FiniteMeasure& mu) {
  require_same_alphabet(nu, mu, "tv_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < nu.alphabet_size(); ++i) acc += std::abs(nu[i] - mu[i]);
  return 0.5 * acc;
}

double bounded_metric(double x, double y) {
  const double d = std::abs(x - y);
  return d / (1.0 + d);
}

AtomicWeightMeasure rebalance_atoms(const AtomicWeightMeasure& a, Rng& rng) {
  std::vector<double> atoms(a.values());
  const auto n = static_cast<double>(atoms.size());
  const double total = a.sum();
  if (std::abs(total - n) <= 1e-12 * n) return a;

  const double gap = std::abs(total - n);
  const double chunk = gap / n;
  double remaining = gap;
  const double stop = 1e-15 * n;
  if (total > n) {
    while (remaining > stop) {
      const std::size_t i = sample_categorical(rng, atoms);
      const double take = std::min({chunk, remaining, atoms[i]});
      atoms[i] -= take;
      remaining -= take;
    }
  } else {
    while (remaining > stop) {
      const auto i = static_cast<std::size_t>(rng.uniform_index(atoms.size()));
      const double put = std::min(chunk, remaining);
      atoms[i] += put;
      remaining -= put;
    }
  }

  // Absorb rounding residue in the largest atom so the sum is n.
  const double residue =
      n - std::accumulate(atoms.begin(), atoms.end(), 0.0);
  auto largest = std::max_element(atoms.begin(), atoms.end());
  *largest = std::max(0.0, *largest + residue);
  return AtomicWeightMeasure(std::move(atoms));
}

AtomicWeightMeasure push_forward_scale(const AtomicWeightMeasure& a, double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw DomainError("push_forward_scale: m must be positive and finite");
  }
  std::vector<double> atoms(a.values());
  for (double& x : atoms) x /= m;
  return AtomicWeightMeasure(std::move(atoms));
}

void write_csv(std::ostream& os, const FiniteMeasure& measure) {
  os << "symbol,mass\n";
  for (std::size_t i = 0; i < measure.alphabet_size(); ++i) {
    os << i << ',' << format_double(measure[i]) << '\n';
  }
}

void write_csv(std::ostream& os, const AtomicWeightMeasure& measure) {
  os << "index,atom\n";
  for (std::size_t i = 0; i < measure.n(); ++i) {
    os << i << ',' << format_double(measure.atoms()[i]) << '\n';
  }
}

}  // namespace ldboot
