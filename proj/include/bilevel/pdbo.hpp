#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bilevel/inner_solver.hpp"
#include "bilevel/problem.hpp"
#include "bilevel/schedule.hpp"
#include "bilevel/vector_pair.hpp"

namespace bilevel {

/// Default dual-variable cap B = D_f / delta + 1.
inline double default_dual_bound(const ProblemConstants& c, const SmoothingParams& params) {
  if (!(params.delta > 0.0))
    throw std::invalid_argument("default_dual_bound: delta must be > 0");
  return c.d_f / params.delta + 1.0;
}

/// Theory-mode schedule assembled from a problem's constants. The constraint
/// smoothness uses the derived rho_h (plus the tether term for subproblems).
inline Schedule make_theory_schedule(const ProblemSpec& problem, const SmoothingParams& params,
                                     double dual_bound) {
  const ProblemConstants& c = problem.constants;
  double rho_h_eff = constraint_grad_lipschitz(c.rho_g, params.alpha);
  if (problem.constraint_prox) rho_h_eff += 2.0 * problem.constraint_prox->rho;
  return Schedule::theory(c.mu, c.rho_f, rho_h_eff, c.l_g, dual_bound);
}

struct PdboConfig {
  SmoothingParams smoothing;
  Schedule schedule = Schedule::constant(0.2, 0.1, 0.0);
  double dual_bound = 0.0;  // B; <= 0 selects default_dual_bound at run start
  long n_inner = 5;         // N
  long t_max = 1000;        // T
  VectorPair z_init;
  double lambda_init = 0.0;
  bool inner_warm_start = true;
  long record_every = 1;
};

struct IterationRecord {
  long t = 0;
  double f_value = 0.0;
  double h_hat = 0.0;
  double lambda = 0.0;
  double step_norm = 0.0;
  long grad_calls_cum = 0;
  double wall_time_s = 0.0;
};

struct PdboResult {
  VectorPair z_bar;    // gamma-weighted average of z_1..z_T
  VectorPair z_last;   // z_T
  double lambda_last = 0.0;
  double h_hat_last = 0.0;  // constraint estimate at z_{T-1}
  std::vector<IterationRecord> trajectory;
  CallCounters calls;
};

/// Accelerated dual ascent step, clamped to [0, B]:
///   lambda <- clamp(lambda + ((1+theta) h_t - theta h_{t-1}) / tau, 0, B).
inline double dual_step(double lambda_t, double h_hat_t, double h_hat_prev, double tau_t,
                        double theta_t, double dual_bound) {
  if (!(tau_t > 0.0)) throw std::invalid_argument("dual_step: tau must be > 0");
  if (!(dual_bound > 0.0)) throw std::invalid_argument("dual_step: dual bound must be > 0");
  if (!std::isfinite(lambda_t) || !std::isfinite(h_hat_t) || !std::isfinite(h_hat_prev))
    throw std::runtime_error("dual_step: non-finite input");
  const double drive = (1.0 + theta_t) * h_hat_t - theta_t * h_hat_prev;
  double lambda = lambda_t + drive / tau_t;
  if (!(lambda >= 0.0)) lambda = 0.0;
  if (lambda > dual_bound) lambda = dual_bound;
  return lambda;
}

/// Projected descent step on the Lagrangian gradient grad f + lambda grad h:
///   z <- Pi_Z(z - (grad f(z) + lambda grad_h) / eta).
inline VectorPair primal_step(const ProblemSpec& problem, const VectorPair& z_t,
                              double lambda_next, const VectorPair& grad_h_hat, double eta_t,
                              CallCounters* counters = nullptr) {
  if (!(eta_t > 0.0)) throw std::invalid_argument("primal_step: eta must be > 0");
  const VectorPair grad_f = problem.f_grad(z_t.x, z_t.y);
  if (counters) ++counters->f_grad;
  if (!grad_f.all_finite() || !grad_h_hat.all_finite())
    throw std::runtime_error("primal_step: non-finite gradient");
  const double step = std::isinf(eta_t) ? 0.0 : 1.0 / eta_t;
  const VectorPair direction = grad_f + lambda_next * grad_h_hat;
  return problem.project(z_t - step * direction);
}

/// Primal-dual loop on the relaxed value-function reformulation. Each
/// iteration estimates the smoothed inner minimizer with n_inner projected
/// gradient steps, updates the dual variable from the constraint estimate,
/// then takes the projected primal step. Output is the gamma-weighted average
/// of the iterates. Deterministic for a fixed config.
inline PdboResult run_pdbo(const ProblemSpec& problem, const PdboConfig& config) {
  if (config.t_max < 1) throw std::invalid_argument("run_pdbo: t_max must be >= 1");
  if (config.n_inner < 1) throw std::invalid_argument("run_pdbo: n_inner must be >= 1");
  if (config.record_every < 1)
    throw std::invalid_argument("run_pdbo: record_every must be >= 1");

  const double dual_bound = config.dual_bound > 0.0
                                ? config.dual_bound
                                : default_dual_bound(problem.constants, config.smoothing);
  if (config.lambda_init < 0.0 || config.lambda_init > dual_bound)
    throw std::invalid_argument("run_pdbo: lambda_init must lie in [0, B]");

  PdboResult result;
  CallCounters& calls = result.calls;
  const auto start = std::chrono::steady_clock::now();

  VectorPair z = problem.project(config.z_init);
  double lambda = config.lambda_init;
  Eigen::VectorXd y_warm = problem.set_y.center();

  VectorPair z_bar_acc = VectorPair::zero(problem.dim_x, problem.dim_y);
  double gamma_sum = 0.0;
  double h_prev = 0.0;

  for (long t = 0; t < config.t_max; ++t) {
    VectorPair z_next;
    double h_cur = 0.0;
    try {
      const InnerSolveResult inner =
          inner_pgd(problem, config.smoothing, z.x, config.n_inner, y_warm, &calls);
      if (config.inner_warm_start) y_warm = inner.y_hat;

      h_cur = constraint_estimate(problem, config.smoothing, z, inner, &calls);
      const VectorPair grad_h =
          constraint_grad_estimate(problem, config.smoothing, z, inner, &calls);

      if (t == 0) h_prev = h_cur;  // z_{-1} = z_0 convention
      lambda = dual_step(lambda, h_cur, h_prev, config.schedule.tau(t),
                         config.schedule.theta(t), dual_bound);
      z_next = primal_step(problem, z, lambda, grad_h, config.schedule.eta(t), &calls);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_pdbo: iteration " + std::to_string(t) + ": " + e.what());
    }

    const double gamma = config.schedule.gamma(t);
    z_bar_acc += gamma * z_next;
    gamma_sum += gamma;

    if (t % config.record_every == 0 || t == config.t_max - 1) {
      IterationRecord rec;
      rec.t = t;
      rec.f_value = problem.f_value(z.x, z.y);
      ++calls.f_value;
      rec.h_hat = h_cur;
      rec.lambda = lambda;
      rec.step_norm = (z_next - z).norm();
      rec.grad_calls_cum = calls.gradient_equivalents();
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.trajectory.push_back(rec);
    }

    h_prev = h_cur;
    z = std::move(z_next);
    result.h_hat_last = h_cur;
  }

  result.z_last = z;
  result.lambda_last = lambda;
  result.z_bar = (1.0 / gamma_sum) * z_bar_acc;
  return result;
}

}  // namespace bilevel
