#pragma once

#include <vector>

namespace ldboot {

/// minimize  sum_i rho_i ln(rho_i / q_i) - rho_i + q_i
/// subject to A rho = b, rho >= 0.
///
/// The optimizer has the exponential-family form rho_i = q_i exp((A^T theta)_i)
/// and theta maximizes the smooth concave dual
///   D(theta) = theta^T b - sum_i q_i exp((A^T theta)_i) + sum_i q_i.
/// Cells with q_i = 0 stay at zero. Rows with b_r = 0 and nonnegative
/// coefficients pin their support to zero and are removed before the solve.
struct EntropyProjectionProblem {
  std::vector<double> reference;                 ///< q
  std::vector<std::vector<double>> constraints;  ///< rows of A
  std::vector<double> targets;                   ///< b
};

struct EntropyProjectionOptions {
  double gradient_tol = 1e-13;
  int max_iterations = 500;
  /// Any |(A^T theta)_i| beyond this is read as dual divergence.
  double divergence_cap = 600.0;
};

struct EntropyProjectionResult {
  enum class Status { converged, infeasible };
  Status status = Status::converged;
  std::vector<double> solution;
  double relative_entropy = 0.0;  ///< sum rho ln(rho/q)
  double primal = 0.0;            ///< full primal objective
  double dual = 0.0;
  double dual_gap = 0.0;          ///< primal - dual, >= 0 up to rounding
  double max_residual = 0.0;      ///< max_r |(A rho)_r - b_r|
  int iterations = 0;
};

/// Damped Newton ascent on the dual. Throws NumericError if the iteration
/// budget runs out without either converging or diverging.
EntropyProjectionResult project_entropy(const EntropyProjectionProblem& problem,
                                        const EntropyProjectionOptions& options = {});

}  // namespace ldboot
