#include "ldboot/entropy_projection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ldboot/errors.hpp"

namespace ldboot {

namespace {

struct Presolved {
  std::vector<std::size_t> cells;  // active original cell indices
  std::vector<std::size_t> rows;   // surviving original row indices
  bool infeasible = false;
};

Presolved presolve(const EntropyProjectionProblem& p) {
  const std::size_t n = p.reference.size();
  const std::size_t r = p.constraints.size();
  std::vector<bool> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = p.reference[i] > 0.0;
  std::vector<bool> row_live(r, true);

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < r; ++k) {
      if (!row_live[k] || std::abs(p.targets[k]) > 1e-15) continue;
      bool nonnegative = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i] && p.constraints[k][i] < 0.0) nonnegative = false;
      }
      if (!nonnegative) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i] && p.constraints[k][i] > 0.0) {
          active[i] = false;
          changed = true;
        }
      }
      row_live[k] = false;
      changed = true;
    }
  }

  Presolved out;
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) out.cells.push_back(i);
  }
  for (std::size_t k = 0; k < r; ++k) {
    if (!row_live[k]) continue;
    bool any = false;
    for (std::size_t i : out.cells) any = any || p.constraints[k][i] != 0.0;
    if (!any) {
      if (std::abs(p.targets[k]) > 1e-12) out.infeasible = true;
      continue;
    }
    out.rows.push_back(k);
  }
  if (out.cells.empty() && !out.rows.empty()) out.infeasible = true;
  return out;
}

// Lawson-Hanson: min |Ax - b| over x >= 0. Returns the residual norm.
double nonnegative_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-13 * std::max(1.0, b.cwiseAbs().maxCoeff());
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    const Eigen::VectorXd zs = sub.completeOrthogonalDecomposition().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zs(static_cast<Eigen::Index>(k));
    return z;
  };
  for (Eigen::Index outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w(i) > tol && (best < 0 || w(i) > w(best))) {
        best = i;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (Eigen::Index inner = 0; inner < 3 * n + 10; ++inner) {
      const Eigen::VectorXd z = solve_passive();
      double step = 1.0;
      bool clipped = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) {
          step = std::min(step, x(i) / (x(i) - z(i)));
          clipped = true;
        }
      }
      if (!clipped) {
        x = z;
        break;
      }
      x += step * (z - x);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && x(i) <= 1e-15) {
          passive[static_cast<std::size_t>(i)] = false;
          x(i) = 0.0;
        }
      }
    }
  }
  return (A * x - b).norm();
}

}  // namespace

EntropyProjectionResult project_entropy(const EntropyProjectionProblem& problem,
                                        const EntropyProjectionOptions& options) {
  const std::size_t n_all = problem.reference.size();
  if (problem.constraints.size() != problem.targets.size()) {
    throw DimensionError("project_entropy: constraint rows and targets differ in count");
  }
  for (const auto& row : problem.constraints) {
    if (row.size() != n_all) throw DimensionError("project_entropy: ragged constraint row");
  }
  for (double q : problem.reference) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw DomainError("project_entropy: reference must be finite and nonnegative");
    }
  }

  EntropyProjectionResult result;
  result.solution.assign(n_all, 0.0);
  EntropyProjectionProblem working = problem;
  int total_iterations = 0;

  // Each round solves on the current support. A feasible problem whose dual
  // still diverges has its optimum on a face of the orthant: the cells
  // driven to zero are dropped and the solve restarts.
  for (std::size_t round = 0; round <= n_all; ++round) {
    const Presolved pre = presolve(working);
    if (pre.infeasible) {
      result.status = EntropyProjectionResult::Status::infeasible;
      result.iterations = total_iterations;
      return result;
    }

    const auto n = static_cast<Eigen::Index>(pre.cells.size());
    const auto r = static_cast<Eigen::Index>(pre.rows.size());
    Eigen::MatrixXd A(r, n);
    Eigen::VectorXd b(r);
    Eigen::VectorXd q(n);
    for (Eigen::Index k = 0; k < r; ++k) {
      b(k) = working.targets[pre.rows[static_cast<std::size_t>(k)]];
      for (Eigen::Index i = 0; i < n; ++i) {
        A(k, i) = working.constraints[pre.rows[static_cast<std::size_t>(k)]]
                                     [pre.cells[static_cast<std::size_t>(i)]];
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      q(i) = working.reference[pre.cells[static_cast<std::size_t>(i)]];
    }
    if (r > 0 && nonnegative_residual(A, b) > 1e-9 * std::max(1.0, b.norm())) {
      result.status = EntropyProjectionResult::Status::infeasible;
      result.iterations = total_iterations;
      return result;
    }
    const double q_total = q.sum();

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(r);
    auto primal_point = [&](const Eigen::VectorXd& t) -> Eigen::VectorXd {
      const Eigen::VectorXd exponent = A.transpose() * t;
      return (q.array() * exponent.array().exp()).matrix();
    };
    auto dual_value = [&](const Eigen::VectorXd& t, const Eigen::VectorXd& rho) {
      return t.dot(b) - rho.sum() + q_total;
    };
    auto exponent_norm = [&](const Eigen::VectorXd& t) {
      return r == 0 ? 0.0 : (A.transpose() * t).cwiseAbs().maxCoeff();
    };

    Eigen::VectorXd rho = primal_point(theta);
    double dual = dual_value(theta, rho);
    bool converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      const Eigen::VectorXd gradient = b - A * rho;
      if (r == 0 || gradient.cwiseAbs().maxCoeff() <= options.gradient_tol) {
        converged = true;
        break;
      }
      const Eigen::MatrixXd hessian = A * rho.asDiagonal() * A.transpose();
      const Eigen::VectorXd step = hessian.completeOrthogonalDecomposition().solve(gradient);
      const double slope = gradient.dot(step);

      // Near the optimum the dual increase drops below double resolution, so
      // a step is also accepted when it shrinks a small gradient.
      const double gradient_norm = gradient.norm();
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const Eigen::VectorXd trial = theta + t * step;
        if (exponent_norm(trial) > options.divergence_cap) continue;
        const Eigen::VectorXd trial_rho = primal_point(trial);
        const double trial_dual = dual_value(trial, trial_rho);
        if (!std::isfinite(trial_dual)) continue;
        const bool ascent = trial_dual >= dual + 1e-4 * t * slope && trial_dual > dual;
        const bool contraction =
            gradient_norm < 1e-6 &&
            (b - A * trial_rho).norm() <= (1.0 - 1e-4 * t) * gradient_norm;
        if (ascent || contraction) {
          theta = trial;
          rho = trial_rho;
          dual = trial_dual;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        converged = gradient.cwiseAbs().maxCoeff() <= 1e3 * options.gradient_tol;
        break;
      }
      if (exponent_norm(theta) > 0.99 * options.divergence_cap) break;
    }
    total_iterations += it;

    if (!converged) {
      // Drop cells the dual is pushing to zero, if any.
      const Eigen::VectorXd exponent = A.transpose() * theta;
      const double cutoff = -0.25 * std::max(exponent_norm(theta), 40.0);
      bool dropped = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (exponent(i) < cutoff) {
          working.reference[pre.cells[static_cast<std::size_t>(i)]] = 0.0;
          dropped = true;
        }
      }
      if (dropped) continue;
      std::ostringstream msg;
      msg << "project_entropy: no convergence after " << total_iterations
          << " iterations; gradient norm " << (b - A * rho).cwiseAbs().maxCoeff() << ", dual "
          << dual << ", dual gap unavailable";
      throw NumericError(msg.str());
    }

    double kl = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q_orig = problem.reference[pre.cells[static_cast<std::size_t>(i)]];
      if (rho(i) > 0.0) kl += rho(i) * std::log(rho(i) / q_orig);
      result.solution[pre.cells[static_cast<std::size_t>(i)]] = rho(i);
    }
    double q_orig_total = 0.0;
    for (double v : problem.reference) q_orig_total += v;
    result.relative_entropy = kl;
    result.primal = kl - rho.sum() + q_orig_total;
    // Dropped cells carry their reference mass into the dual objective.
    result.dual = dual + (q_orig_total - q_total);
    result.dual_gap = result.primal - result.dual;
    double residual = 0.0;
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
      double lhs = 0.0;
      for (std::size_t i = 0; i < n_all; ++i) lhs += problem.constraints[k][i] * result.solution[i];
      residual = std::max(residual, std::abs(lhs - problem.targets[k]));
    }
    result.max_residual = residual;
    result.iterations = total_iterations;
    return result;
  }
  throw NumericError("project_entropy: support reduction did not terminate");
}

}  // namespace ldboot
