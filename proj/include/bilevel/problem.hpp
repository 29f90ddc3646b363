#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>

#include "bilevel/feasible_set.hpp"
#include "bilevel/rng.hpp"
#include "bilevel/vector_pair.hpp"

namespace bilevel {

/// Inner regularization weight alpha and constraint slack delta.
/// Zero values are representable (exact/limit evaluations use them); the
/// solvers check strict positivity where a quantity appears in a denominator.
struct SmoothingParams {
  double alpha = 1e-3;
  double delta = 1e-3;

  SmoothingParams() = default;
  SmoothingParams(double a, double d) : alpha(a), delta(d) {
    if (!(alpha >= 0.0) || !(delta >= 0.0))
      throw std::invalid_argument("SmoothingParams: alpha and delta must be >= 0");
  }
};

/// Smoothness and geometry constants of a problem instance.
/// rho_h is always derived (see constraint_grad_lipschitz), never stored.
struct ProblemConstants {
  double rho_f = 0.0;  // gradient Lipschitz constant of f
  double rho_g = 0.0;  // gradient Lipschitz constant of g
  double l_g = 0.0;    // sup ||grad g|| over Z
  double d_z = 0.0;    // diameter of Z
  double d_f = 0.0;    // sup |f - f'| over Z
  double mu = 0.0;     // strong convexity modulus of f (0 if none)
};

/// Gradient Lipschitz constant of the smoothed value-function constraint.
inline double constraint_grad_lipschitz(double rho_g, double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("constraint_grad_lipschitz: alpha must be > 0");
  return rho_g * (2.0 + rho_g / alpha);
}

/// Quadratic tether rho*||x - center_x||^2 added to the constraint of a
/// proximal subproblem. Consumed by the constraint estimators.
struct ConstraintProx {
  double rho = 0.0;
  Eigen::VectorXd center_x;
};

/// Call accounting used for budgeted comparisons; each hvp counts as one
/// gradient-equivalent evaluation.
struct CallCounters {
  long f_value = 0;
  long f_grad = 0;
  long g_value = 0;
  long g_grad = 0;
  long hvp = 0;

  long gradient_equivalents() const { return f_grad + g_grad + hvp; }

  CallCounters& operator+=(const CallCounters& o) {
    f_value += o.f_value;
    f_grad += o.f_grad;
    g_value += o.g_value;
    g_grad += o.g_grad;
    hvp += o.hvp;
    return *this;
  }
};

/// Bilevel problem contract: outer objective f, inner objective g, their
/// gradients, optional Hessian-vector products, and problem constants.
/// Callbacks must be pure; instances are immutable after construction and
/// safe to share across threads.
struct ProblemSpec {
  using ValueFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using GradFn = std::function<VectorPair(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using HvpFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                              const Eigen::VectorXd&)>;

  Eigen::Index dim_x = 0;
  Eigen::Index dim_y = 0;
  FeasibleSet set_x = FeasibleSet::cube(1, -1.0, 1.0);
  FeasibleSet set_y = FeasibleSet::cube(1, -1.0, 1.0);

  ValueFn f_value;
  GradFn f_grad;
  ValueFn g_value;
  GradFn g_grad;

  HvpFn hvp_g_yy;  // v -> d^2g/dydy * v
  HvpFn hvp_g_xy;  // v -> d^2g/dxdy * v   (result has outer dimension)
  HvpFn hvp_f_yy;  // needed by the averaged-map baseline only
  HvpFn hvp_f_xy;

  ProblemConstants constants;
  bool violates_inner_convexity = false;

  std::optional<ConstraintProx> constraint_prox;

  bool has_g_hvps() const { return static_cast<bool>(hvp_g_yy) && static_cast<bool>(hvp_g_xy); }
  bool has_f_hvps() const { return static_cast<bool>(hvp_f_yy) && static_cast<bool>(hvp_f_xy); }

  FeasibleSet joint_set() const { return FeasibleSet::product({set_x, set_y}); }

  VectorPair project(const VectorPair& z) const {
    return {set_x.project(z.x), set_y.project(z.y)};
  }
};

/// Sample-based estimates of rho_f, rho_g, L_g and D_f, each inflated by a
/// 1.5 safety factor because sampling underestimates suprema. d_z is exact.
/// Deterministic for a fixed seed.
inline ProblemConstants estimate_constants(const ProblemSpec& problem, int sample_count,
                                           std::uint64_t rng_seed) {
  if (sample_count < 2)
    throw std::invalid_argument("estimate_constants: sample_count must be >= 2");
  const FeasibleSet z_set = problem.joint_set();
  if (!(z_set.diameter() > 0.0))
    throw std::invalid_argument("estimate_constants: degenerate feasible set");

  SplitMix64 rng(rng_seed);
  double rho_f = 0.0, rho_g = 0.0, l_g = 0.0;
  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -std::numeric_limits<double>::infinity();

  const Eigen::Index p = problem.dim_x;
  for (int i = 0; i < sample_count; ++i) {
    VectorPair a = VectorPair::from_flat(z_set.sample_uniform(rng), p);
    VectorPair b = VectorPair::from_flat(z_set.sample_uniform(rng), p);
    const double dist = (a - b).norm();

    const double fa = problem.f_value(a.x, a.y);
    f_min = std::min(f_min, fa);
    f_max = std::max(f_max, fa);

    const VectorPair gfa = problem.f_grad(a.x, a.y);
    const VectorPair gga = problem.g_grad(a.x, a.y);
    l_g = std::max(l_g, gga.norm());
    if (dist > 1e-12) {
      const VectorPair gfb = problem.f_grad(b.x, b.y);
      const VectorPair ggb = problem.g_grad(b.x, b.y);
      rho_f = std::max(rho_f, (gfa - gfb).norm() / dist);
      rho_g = std::max(rho_g, (gga - ggb).norm() / dist);
    }
  }

  ProblemConstants c;
  c.rho_f = 1.5 * rho_f;
  c.rho_g = 1.5 * rho_g;
  c.l_g = 1.5 * l_g;
  c.d_f = 1.5 * (f_max - f_min);
  c.d_z = z_set.diameter();
  c.mu = 0.0;  // never inferred from samples
  return c;
}

}  // namespace bilevel
