#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bilevel/inner_solver.hpp"
#include "bilevel/problem.hpp"
#include "bilevel/vector_pair.hpp"

namespace bilevel {

/// First-order optimality residuals of a candidate (z, lambda) for the
/// relaxed reformulation. All fields are nonnegative.
struct KktResidual {
  double feasibility = 0.0;      // [h(z)]_+
  double complementarity = 0.0;  // |lambda h(z)|
  double stationarity = 0.0;     // dist(grad f + lambda grad h, -N(z; Z))
  double proximity = 0.0;        // ||z - z_ref||^2 when a reference is supplied

  double max() const {
    return std::max(std::max(feasibility, complementarity), stationarity);
  }
};

/// Evaluates the KKT residuals with the constraint and its gradient computed
/// at high inner accuracy (step-norm tolerance inner_tolerance).
inline KktResidual kkt_residual(const ProblemSpec& problem, const SmoothingParams& params,
                                const VectorPair& z, double lambda,
                                double inner_tolerance = 1e-8,
                                const std::optional<VectorPair>& z_ref = std::nullopt) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("kkt_residual: lambda must be >= 0");
  if (!(inner_tolerance > 0.0))
    throw std::invalid_argument("kkt_residual: inner_tolerance must be > 0");

  const InnerSolveResult inner = inner_pgd_to_tolerance(problem, params, z.x, inner_tolerance,
                                                        problem.set_y.center());
  const double h = constraint_estimate(problem, params, z, inner);
  const VectorPair grad_h = constraint_grad_estimate(problem, params, z, inner);
  const VectorPair grad_f = problem.f_grad(z.x, z.y);
  const VectorPair grad_lagrangian = grad_f + lambda * grad_h;

  KktResidual r;
  r.feasibility = std::max(h, 0.0);
  r.complementarity = std::abs(lambda * h);
  r.stationarity =
      problem.joint_set().normal_cone_distance(z.flatten(), grad_lagrangian.flatten());
  if (z_ref) r.proximity = (z - *z_ref).squared_norm();
  return r;
}

struct BenchmarkMetrics {
  double outer_gap = 0.0;  // f(z) - f*
  double inner_gap = 0.0;  // g(x, y) - g*(x)
  double dist_x = 0.0;
  double dist_y = 0.0;
};

/// Unsmoothed inner optimal value g*(x). Convex inner objectives are solved
/// by projected gradient descent in the alpha = 0 limit; instances flagged
/// nonconvex use a one-dimensional grid oracle at the given resolution.
inline double inner_optimal_value(const ProblemSpec& problem, const Eigen::VectorXd& x,
                                  double tolerance = 1e-10, double grid_resolution = 1e-3) {
  if (problem.violates_inner_convexity) {
    if (problem.dim_y != 1)
      throw std::invalid_argument(
          "inner_optimal_value: grid oracle supports one-dimensional inner sets only");
    const Eigen::VectorXd c = problem.set_y.center();
    const double half = 0.5 * problem.set_y.diameter();
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd y(1);
    const long n = static_cast<long>(std::ceil(2.0 * half / grid_resolution));
    for (long i = 0; i <= n; ++i) {
      y[0] = c[0] - half + (2.0 * half * static_cast<double>(i)) / static_cast<double>(n);
      best = std::min(best, problem.g_value(x, y));
    }
    return best;
  }
  const SmoothingParams unsmoothed(0.0, 0.0);
  const InnerSolveResult inner =
      inner_pgd_to_tolerance(problem, unsmoothed, x, tolerance, problem.set_y.center());
  return inner.g_tilde_value;
}

/// Figure-axis metrics against a known reference solution.
inline BenchmarkMetrics benchmark_metrics(const ProblemSpec& problem, const VectorPair& z,
                                          const std::optional<VectorPair>& reference,
                                          const std::optional<double>& f_star) {
  BenchmarkMetrics m;
  if (!f_star) throw std::invalid_argument("benchmark_metrics: f_star required");
  if (!reference) throw std::invalid_argument("benchmark_metrics: reference required");
  m.outer_gap = problem.f_value(z.x, z.y) - *f_star;
  m.inner_gap = problem.g_value(z.x, z.y) - inner_optimal_value(problem, z.x);
  m.dist_x = (z.x - reference->x).norm();
  m.dist_y = (z.y - reference->y).norm();
  return m;
}

/// Least-squares slope of log(value) against log(t). Requires at least four
/// points with positive t and value.
inline double rate_slope(const std::vector<std::pair<double, double>>& trajectory) {
  if (trajectory.size() < 4)
    throw std::invalid_argument("rate_slope: need at least 4 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, v] : trajectory) {
    if (!(t > 0.0) || !(v > 0.0))
      throw std::invalid_argument("rate_slope: t and value must be positive");
    const double lx = std::log(t);
    const double ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(trajectory.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("rate_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace bilevel
