#pragma once

#include <Eigen/Core>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "bilevel/pdbo.hpp"
#include "bilevel/problem.hpp"
#include "bilevel/vector_pair.hpp"

namespace bilevel {

enum class BaselineMethod { ItdR, AidFp, BigSamItd };

inline const char* baseline_name(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::ItdR: return "itd-r";
    case BaselineMethod::AidFp: return "aid-fp";
    case BaselineMethod::BigSamItd: return "bigsam-itd";
  }
  return "?";
}

struct BaselineConfig {
  long inner_steps = 5;        // K_in
  double inner_stepsize = 0.5; // beta
  double outer_stepsize = 0.2;
  long outer_steps = 1000;
  long fp_iterations = 5;      // M, fixed-point solver only
  double averaging = 0.5;      // sequential-averaging weight
  VectorPair z_init;
  long record_every = 1;
};

struct HypergradResult {
  Eigen::VectorXd grad_x;
  Eigen::VectorXd y_final;
};

namespace detail {

inline void require_hvps(const ProblemSpec& problem, bool need_f) {
  if (!problem.has_g_hvps() || (need_f && !problem.has_f_hvps()))
    throw std::invalid_argument("baseline requires second-order callbacks");
}

}  // namespace detail

/// Hypergradient by reverse-mode differentiation through K_in unrolled
/// projected gradient steps on the inner objective. Coordinates clipped by
/// the projection get zero adjoint; the projection is the identity otherwise.
inline HypergradResult hypergrad_itd_reverse(const ProblemSpec& problem,
                                             const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& y0, long k_in, double beta,
                                             CallCounters* counters = nullptr) {
  detail::require_hvps(problem, false);
  if (k_in < 0) throw std::invalid_argument("hypergrad_itd_reverse: k_in must be >= 0");

  std::vector<Eigen::VectorXd> ys;
  std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> clipped;
  ys.reserve(static_cast<std::size_t>(k_in) + 1);
  ys.push_back(problem.set_y.project(y0));

  for (long k = 0; k < k_in; ++k) {
    const VectorPair grad = problem.g_grad(x, ys.back());
    if (counters) ++counters->g_grad;
    const Eigen::VectorXd raw = ys.back() - beta * grad.y;
    Eigen::VectorXd next = problem.set_y.project(raw);
    clipped.push_back((next - raw).array().abs() > 0.0);
    ys.push_back(std::move(next));
  }

  const VectorPair grad_f = problem.f_grad(x, ys.back());
  if (counters) ++counters->f_grad;
  Eigen::VectorXd adjoint = grad_f.y;
  Eigen::VectorXd grad_x = grad_f.x;

  for (long k = k_in - 1; k >= 0; --k) {
    const auto& mask = clipped[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < adjoint.size(); ++i)
      if (mask[i]) adjoint[i] = 0.0;
    grad_x -= beta * problem.hvp_g_xy(x, ys[static_cast<std::size_t>(k)], adjoint);
    adjoint -= beta * problem.hvp_g_yy(x, ys[static_cast<std::size_t>(k)], adjoint);
    if (counters) counters->hvp += 2;
  }

  return HypergradResult{std::move(grad_x), ys.back()};
}

/// Hypergradient by implicit differentiation, approximating the inverse
/// Hessian solve with M fixed-point iterations:
///   v <- v - beta (hvp_yy v - grad_y f),   grad = grad_x f - hvp_xy v.
inline Eigen::VectorXd hypergrad_aid_fp(const ProblemSpec& problem, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y_hat, long m, double beta,
                                        CallCounters* counters = nullptr) {
  detail::require_hvps(problem, false);
  const VectorPair grad_f = problem.f_grad(x, y_hat);
  if (counters) ++counters->f_grad;

  Eigen::VectorXd v = Eigen::VectorXd::Zero(y_hat.size());
  for (long i = 0; i < m; ++i) {
    v -= beta * (problem.hvp_g_yy(x, y_hat, v) - grad_f.y);
    if (counters) ++counters->hvp;
  }
  Eigen::VectorXd out = grad_f.x - problem.hvp_g_xy(x, y_hat, v);
  if (counters) ++counters->hvp;
  return out;
}

namespace detail {

/// One sequential-averaging inner step: a convex combination of a gradient
/// step on g and a gradient step on f, projected.
inline Eigen::VectorXd bigsam_inner_step(const ProblemSpec& problem, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& y, double beta, double avg,
                                         CallCounters* counters) {
  const VectorPair gg = problem.g_grad(x, y);
  const VectorPair gf = problem.f_grad(x, y);
  if (counters) {
    ++counters->g_grad;
    ++counters->f_grad;
  }
  const Eigen::VectorXd blended = avg * gg.y + (1.0 - avg) * gf.y;
  return problem.set_y.project(y - beta * blended);
}

/// Reverse-mode hypergradient through the averaged inner map; needs second
/// order information for both f and g.
inline HypergradResult hypergrad_bigsam(const ProblemSpec& problem, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y0, long k_in, double beta,
                                        double avg, CallCounters* counters) {
  require_hvps(problem, true);

  std::vector<Eigen::VectorXd> ys;
  std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> clipped;
  ys.push_back(problem.set_y.project(y0));
  for (long k = 0; k < k_in; ++k) {
    const VectorPair gg = problem.g_grad(x, ys.back());
    const VectorPair gf = problem.f_grad(x, ys.back());
    if (counters) {
      ++counters->g_grad;
      ++counters->f_grad;
    }
    const Eigen::VectorXd raw =
        ys.back() - beta * (avg * gg.y + (1.0 - avg) * gf.y);
    Eigen::VectorXd next = problem.set_y.project(raw);
    clipped.push_back((next - raw).array().abs() > 0.0);
    ys.push_back(std::move(next));
  }

  const VectorPair grad_f = problem.f_grad(x, ys.back());
  if (counters) ++counters->f_grad;
  Eigen::VectorXd adjoint = grad_f.y;
  Eigen::VectorXd grad_x = grad_f.x;

  for (long k = k_in - 1; k >= 0; --k) {
    const auto& yk = ys[static_cast<std::size_t>(k)];
    const auto& mask = clipped[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < adjoint.size(); ++i)
      if (mask[i]) adjoint[i] = 0.0;
    grad_x -= beta * (avg * problem.hvp_g_xy(x, yk, adjoint) +
                      (1.0 - avg) * problem.hvp_f_xy(x, yk, adjoint));
    adjoint -= beta * (avg * problem.hvp_g_yy(x, yk, adjoint) +
                       (1.0 - avg) * problem.hvp_f_yy(x, yk, adjoint));
    if (counters) counters->hvp += 4;
  }
  return HypergradResult{std::move(grad_x), ys.back()};
}

}  // namespace detail

/// Trajectory-producing run shared by the three hypergradient baselines.
/// z_last carries the final outer variable and the final inner iterate.
struct RunResult {
  VectorPair z_last;
  std::vector<IterationRecord> trajectory;
  CallCounters calls;
};

/// Outer loop: hypergradient step on x (projected), inner state warm-started
/// across outer iterations. Deterministic.
inline RunResult run_baseline(const ProblemSpec& problem, BaselineMethod method,
                              const BaselineConfig& config) {
  if (config.outer_steps < 0)
    throw std::invalid_argument("run_baseline: outer_steps must be >= 0");
  if (config.record_every < 1)
    throw std::invalid_argument("run_baseline: record_every must be >= 1");
  detail::require_hvps(problem, method == BaselineMethod::BigSamItd);

  RunResult result;
  CallCounters& calls = result.calls;
  const auto start = std::chrono::steady_clock::now();

  Eigen::VectorXd x = problem.set_x.project(config.z_init.x);
  Eigen::VectorXd y = problem.set_y.project(config.z_init.y);

  for (long t = 0; t < config.outer_steps; ++t) {
    Eigen::VectorXd grad_x;
    Eigen::VectorXd y_next;

    switch (method) {
      case BaselineMethod::ItdR: {
        HypergradResult hg = hypergrad_itd_reverse(problem, x, y, config.inner_steps,
                                                   config.inner_stepsize, &calls);
        grad_x = std::move(hg.grad_x);
        y_next = std::move(hg.y_final);
        break;
      }
      case BaselineMethod::AidFp: {
        Eigen::VectorXd yk = y;
        for (long k = 0; k < config.inner_steps; ++k) {
          const VectorPair grad = problem.g_grad(x, yk);
          ++calls.g_grad;
          yk = problem.set_y.project(yk - config.inner_stepsize * grad.y);
        }
        grad_x = hypergrad_aid_fp(problem, x, yk, config.fp_iterations,
                                  config.inner_stepsize, &calls);
        y_next = std::move(yk);
        break;
      }
      case BaselineMethod::BigSamItd: {
        HypergradResult hg =
            detail::hypergrad_bigsam(problem, x, y, config.inner_steps,
                                     config.inner_stepsize, config.averaging, &calls);
        grad_x = std::move(hg.grad_x);
        y_next = std::move(hg.y_final);
        break;
      }
    }

    if (!grad_x.allFinite())
      throw std::runtime_error("run_baseline: non-finite hypergradient at step " +
                               std::to_string(t));
    Eigen::VectorXd x_next = problem.set_x.project(x - config.outer_stepsize * grad_x);

    if (t % config.record_every == 0 || t == config.outer_steps - 1) {
      IterationRecord rec;
      rec.t = t;
      rec.f_value = problem.f_value(x, y_next);
      ++calls.f_value;
      rec.h_hat = std::numeric_limits<double>::quiet_NaN();
      rec.lambda = std::numeric_limits<double>::quiet_NaN();
      rec.step_norm = std::sqrt((x_next - x).squaredNorm() + (y_next - y).squaredNorm());
      rec.grad_calls_cum = calls.gradient_equivalents();
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.trajectory.push_back(rec);
    }

    x = std::move(x_next);
    y = std::move(y_next);
  }

  result.z_last = VectorPair{x, y};
  return result;
}

}  // namespace bilevel
