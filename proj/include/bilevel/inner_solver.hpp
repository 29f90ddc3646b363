#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bilevel/problem.hpp"
#include "bilevel/vector_pair.hpp"

namespace bilevel {

/// Estimate of the smoothed inner minimizer for one outer point.
struct InnerSolveResult {
  Eigen::VectorXd y_hat;      // estimate of y~*(x), feasible in set_y
  double g_tilde_value = 0;   // g(x, y_hat) + alpha/2 ||y_hat||^2, an overestimate of the min
  long iterations = 0;
};

namespace detail {

inline void require_finite(const Eigen::VectorXd& v, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y, const char* what) {
  if (!v.allFinite()) {
    throw std::runtime_error(std::string(what) + ": non-finite gradient at x = [" +
                             std::to_string(x.size() ? x[0] : 0.0) + ", ...], y = [" +
                             std::to_string(y.size() ? y[0] : 0.0) + ", ...]");
  }
}

}  // namespace detail

/// Projected gradient descent on the smoothed inner objective
/// g(x, .) + alpha/2 ||.||^2 with the fixed stepsize 2/(rho_g + 2 alpha).
/// Performs exactly n_steps updates; an infeasible y_init is projected first.
inline InnerSolveResult inner_pgd(const ProblemSpec& problem, const SmoothingParams& params,
                                  const Eigen::VectorXd& x, long n_steps,
                                  const Eigen::VectorXd& y_init,
                                  CallCounters* counters = nullptr) {
  if (n_steps < 0) throw std::invalid_argument("inner_pgd: n_steps must be >= 0");
  const double rho_g = problem.constants.rho_g;
  if (!(rho_g > 0.0)) throw std::invalid_argument("inner_pgd: constants.rho_g must be > 0");
  const double step = 2.0 / (rho_g + 2.0 * params.alpha);

  Eigen::VectorXd y = problem.set_y.project(y_init);
  for (long n = 0; n < n_steps; ++n) {
    const VectorPair grad = problem.g_grad(x, y);
    if (counters) ++counters->g_grad;
    detail::require_finite(grad.y, x, y, "inner_pgd");
    y = problem.set_y.project(y - step * (grad.y + params.alpha * y));
  }

  InnerSolveResult out;
  out.y_hat = y;
  out.g_tilde_value = problem.g_value(x, y) + 0.5 * params.alpha * y.squaredNorm();
  if (counters) ++counters->g_value;
  out.iterations = n_steps;
  return out;
}

/// Projected gradient descent run until the step norm drops below tol.
/// Iteration cap 10^6; exceeding it is an error.
inline InnerSolveResult inner_pgd_to_tolerance(const ProblemSpec& problem,
                                               const SmoothingParams& params,
                                               const Eigen::VectorXd& x, double tol,
                                               const Eigen::VectorXd& y_init,
                                               CallCounters* counters = nullptr) {
  if (!(tol > 0.0)) throw std::invalid_argument("inner_pgd_to_tolerance: tol must be > 0");
  const double rho_g = problem.constants.rho_g;
  if (!(rho_g > 0.0))
    throw std::invalid_argument("inner_pgd_to_tolerance: constants.rho_g must be > 0");
  const double step = 2.0 / (rho_g + 2.0 * params.alpha);
  constexpr long kMaxIter = 1000000;

  Eigen::VectorXd y = problem.set_y.project(y_init);
  long n = 0;
  for (; n < kMaxIter; ++n) {
    const VectorPair grad = problem.g_grad(x, y);
    if (counters) ++counters->g_grad;
    detail::require_finite(grad.y, x, y, "inner_pgd_to_tolerance");
    Eigen::VectorXd y_next = problem.set_y.project(y - step * (grad.y + params.alpha * y));
    const double moved = (y_next - y).norm();
    y = std::move(y_next);
    if (moved <= tol) break;
  }
  if (n >= kMaxIter)
    throw std::runtime_error("inner_pgd_to_tolerance: iteration cap exceeded");

  InnerSolveResult out;
  out.y_hat = y;
  out.g_tilde_value = problem.g_value(x, y) + 0.5 * params.alpha * y.squaredNorm();
  if (counters) ++counters->g_value;
  out.iterations = n + 1;
  return out;
}

/// Estimated relaxed constraint value
///   h^(z) = g(x, y) - g~(x, y_hat) - delta  [+ rho ||x - c||^2 for subproblems].
/// Underestimates the exact constraint because g~(x, y_hat) overestimates the
/// smoothed minimum.
inline double constraint_estimate(const ProblemSpec& problem, const SmoothingParams& params,
                                  const VectorPair& z, const InnerSolveResult& inner,
                                  CallCounters* counters = nullptr) {
  double h = problem.g_value(z.x, z.y) - inner.g_tilde_value - params.delta;
  if (counters) ++counters->g_value;
  if (problem.constraint_prox) {
    h += problem.constraint_prox->rho * (z.x - problem.constraint_prox->center_x).squaredNorm();
  }
  return h;
}

/// Estimated constraint gradient
///   (grad_x g(x, y) - grad_x g(x, y_hat), grad_y g(x, y))
/// plus 2 rho (x - c) on the outer block for subproblems.
inline VectorPair constraint_grad_estimate(const ProblemSpec& problem,
                                           const SmoothingParams& params, const VectorPair& z,
                                           const InnerSolveResult& inner,
                                           CallCounters* counters = nullptr) {
  (void)params;
  const VectorPair g_at_z = problem.g_grad(z.x, z.y);
  const VectorPair g_at_hat = problem.g_grad(z.x, inner.y_hat);
  if (counters) counters->g_grad += 2;
  detail::require_finite(g_at_z.x, z.x, z.y, "constraint_grad_estimate");
  detail::require_finite(g_at_hat.x, z.x, inner.y_hat, "constraint_grad_estimate");

  VectorPair out{g_at_z.x - g_at_hat.x, g_at_z.y};
  if (problem.constraint_prox) {
    out.x += 2.0 * problem.constraint_prox->rho * (z.x - problem.constraint_prox->center_x);
  }
  return out;
}

/// High-accuracy constraint oracle: solves the smoothed inner problem to the
/// given step-norm tolerance and evaluates the constraint there. Used by
/// metrics and tests, never inside solver loops.
inline double exact_constraint(const ProblemSpec& problem, const SmoothingParams& params,
                               const VectorPair& z, double tolerance,
                               CallCounters* counters = nullptr) {
  const InnerSolveResult inner =
      inner_pgd_to_tolerance(problem, params, z.x, tolerance, problem.set_y.center(), counters);
  return constraint_estimate(problem, params, z, inner, counters);
}

/// Companion oracle for the constraint gradient at matching accuracy.
inline VectorPair exact_constraint_grad(const ProblemSpec& problem, const SmoothingParams& params,
                                        const VectorPair& z, double tolerance,
                                        CallCounters* counters = nullptr) {
  const InnerSolveResult inner =
      inner_pgd_to_tolerance(problem, params, z.x, tolerance, problem.set_y.center(), counters);
  return constraint_grad_estimate(problem, params, z, inner, counters);
}

}  // namespace bilevel
