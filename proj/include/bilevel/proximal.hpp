#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilevel/pdbo.hpp"
#include "bilevel/problem.hpp"
#include "bilevel/rng.hpp"

namespace bilevel {

/// Dual cap for the strongly-convexified subproblems:
/// B = (D_f + rho_f D_Z^2) / delta + 1.
inline double proximal_dual_bound(const ProblemConstants& c, const SmoothingParams& params) {
  if (!(params.delta > 0.0))
    throw std::invalid_argument("proximal_dual_bound: delta must be > 0");
  return (c.d_f + c.rho_f * c.d_z * c.d_z) / params.delta + 1.0;
}

/// Tether coefficient that convexifies the relaxed constraint.
inline double constraint_prox_coefficient(double rho_g, double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("constraint_prox_coefficient: alpha must be > 0");
  return (2.0 * alpha * rho_g + rho_g * rho_g) / (2.0 * alpha);
}

/// Strongly-convexified subproblem centered at `center`:
///   f_k(z) = f(z) + rho_f ||z - center||^2          (strongly convex, modulus rho_f)
///   h_k(z) = h(z) + rho ||x - center.x||^2 <= 0     (convex for the rho above)
/// g is unchanged; the constraint tether is carried as metadata consumed by
/// the constraint estimators. Constants: mu = rho_f, rho_f = 3 rho_f,
/// d_f grows by rho_f D_Z^2 (the oscillation of the added regularizer).
inline ProblemSpec build_subproblem(const ProblemSpec& problem, const SmoothingParams& params,
                                    const VectorPair& center) {
  if (!problem.joint_set().contains(center.flatten(), 1e-9))
    throw std::invalid_argument("build_subproblem: center must be feasible");
  const double rho_f = problem.constants.rho_f;
  const double rho = constraint_prox_coefficient(problem.constants.rho_g, params.alpha);

  ProblemSpec sub = problem;
  const auto base_f_value = problem.f_value;
  const auto base_f_grad = problem.f_grad;
  const VectorPair c = center;

  sub.f_value = [base_f_value, c, rho_f](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double dx = (x - c.x).squaredNorm();
    const double dy = (y - c.y).squaredNorm();
    return base_f_value(x, y) + rho_f * (dx + dy);
  };
  sub.f_grad = [base_f_grad, c, rho_f](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    VectorPair g = base_f_grad(x, y);
    g.x += 2.0 * rho_f * (x - c.x);
    g.y += 2.0 * rho_f * (y - c.y);
    return g;
  };
  if (problem.hvp_f_yy) {
    const auto base = problem.hvp_f_yy;
    sub.hvp_f_yy = [base, rho_f](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& v) {
      return Eigen::VectorXd(base(x, y, v) + 2.0 * rho_f * v);
    };
  }

  sub.constraint_prox = ConstraintProx{rho, center.x};
  sub.constants.mu = rho_f;
  sub.constants.rho_f = 3.0 * rho_f;
  sub.constants.d_f = problem.constants.d_f +
                      rho_f * problem.constants.d_z * problem.constants.d_z;
  return sub;
}

struct ProximalConfig {
  PdboConfig pdbo;          // template: smoothing, T, N, schedule mode, recording
  long k_max = 1;           // K
  std::uint64_t rng_seed = 0;
  VectorPair z_init;
};

struct SubproblemSummary {
  long k = 0;
  double lambda_last = 0.0;
  double lambda_max = 0.0;
  double h_hat_last = 0.0;
  double f_sub_last = 0.0;   // f_k at the subproblem average
  long grad_calls = 0;
};

struct ProximalResult {
  VectorPair z_out;                 // centers[k_hat]
  long k_hat = 0;                   // uniform in {1..K}, from rng_seed
  std::vector<VectorPair> centers;  // z~_0 .. z~_K
  std::vector<SubproblemSummary> per_subproblem;
  CallCounters calls;
};

/// Proximal chain: solve K strongly-convexified subproblems with the
/// primal-dual loop, each centered at the previous output, then return a
/// uniformly random center. The index draw depends only on rng_seed.
inline ProximalResult run_proximal_pdbo(const ProblemSpec& problem,
                                        const ProximalConfig& config) {
  if (config.k_max < 1) throw std::invalid_argument("run_proximal_pdbo: k_max must be >= 1");

  ProximalResult result;
  VectorPair center = problem.project(config.z_init);
  result.centers.push_back(center);

  const double dual_bound = config.pdbo.dual_bound > 0.0
                                ? config.pdbo.dual_bound
                                : proximal_dual_bound(problem.constants, config.pdbo.smoothing);

  for (long k = 1; k <= config.k_max; ++k) {
    try {
      const ProblemSpec sub = build_subproblem(problem, config.pdbo.smoothing, center);

      PdboConfig cfg = config.pdbo;
      cfg.z_init = center;
      cfg.lambda_init = 0.0;
      cfg.dual_bound = dual_bound;
      if (config.pdbo.schedule.is_theory())
        cfg.schedule = make_theory_schedule(sub, cfg.smoothing, dual_bound);

      const PdboResult sub_result = run_pdbo(sub, cfg);

      SubproblemSummary summary;
      summary.k = k;
      summary.lambda_last = sub_result.lambda_last;
      for (const auto& rec : sub_result.trajectory)
        summary.lambda_max = std::max(summary.lambda_max, rec.lambda);
      summary.h_hat_last = sub_result.h_hat_last;
      summary.f_sub_last = sub.f_value(sub_result.z_bar.x, sub_result.z_bar.y);
      summary.grad_calls = sub_result.calls.gradient_equivalents();
      result.per_subproblem.push_back(summary);
      result.calls += sub_result.calls;

      center = sub_result.z_bar;
      result.centers.push_back(center);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_proximal_pdbo: subproblem " + std::to_string(k) + ": " +
                               e.what());
    }
  }

  SplitMix64 rng(config.rng_seed);
  result.k_hat = 1 + static_cast<long>(rng.next() % static_cast<std::uint64_t>(config.k_max));
  result.z_out = result.centers[static_cast<std::size_t>(result.k_hat)];
  return result;
}

}  // namespace bilevel
