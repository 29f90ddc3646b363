#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>

#include "bilevel/problem.hpp"
#include "bilevel/rng.hpp"
#include "bilevel/vector_pair.hpp"

namespace bilevel {

/// Central finite difference of a scalar function of one vector argument.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& v,
    double h = 1e-6) {
  Eigen::VectorXd g(v.size());
  Eigen::VectorXd w = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double vi = v[i];
    w[i] = vi + h;
    const double fp = f(w);
    w[i] = vi - h;
    const double fm = f(w);
    w[i] = vi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = std::max(1.0, std::max(a.norm(), b.norm()));
  return (a - b).norm() / denom;
}

/// Max relative error between an analytic gradient callback and central
/// differences of the value callback, over n_points interior samples.
inline double max_gradient_error(const ProblemSpec& problem, const ProblemSpec::ValueFn& value,
                                 const ProblemSpec::GradFn& grad, int n_points,
                                 std::uint64_t seed, double h = 1e-6) {
  SplitMix64 rng(seed);
  const FeasibleSet z_set = problem.joint_set();
  double worst = 0.0;
  for (int i = 0; i < n_points; ++i) {
    // Shrink toward the center so the difference stencil stays feasible.
    Eigen::VectorXd z = z_set.sample_uniform(rng);
    z = z_set.center() + 0.9 * (z - z_set.center());
    const VectorPair zp = VectorPair::from_flat(z, problem.dim_x);
    const VectorPair analytic = grad(zp.x, zp.y);
    const Eigen::VectorXd fd = finite_difference_gradient(
        [&](const Eigen::VectorXd& v) {
          const VectorPair w = VectorPair::from_flat(v, problem.dim_x);
          return value(w.x, w.y);
        },
        z, h);
    worst = std::max(worst, relative_error(analytic.flatten(), fd));
  }
  return worst;
}

/// Max relative error of a Hessian-vector product against a central
/// difference of the gradient along the direction.
inline double max_hvp_error(const ProblemSpec& problem, const ProblemSpec::GradFn& grad,
                            const ProblemSpec::HvpFn& hvp, bool inner_block, int n_points,
                            std::uint64_t seed, double h = 1e-5) {
  SplitMix64 rng(seed);
  const FeasibleSet z_set = problem.joint_set();
  double worst = 0.0;
  for (int i = 0; i < n_points; ++i) {
    Eigen::VectorXd z = z_set.sample_uniform(rng);
    z = z_set.center() + 0.9 * (z - z_set.center());
    const VectorPair zp = VectorPair::from_flat(z, problem.dim_x);
    Eigen::VectorXd v(problem.dim_y);
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = rng.uniform(-1.0, 1.0);
    const double vn = v.norm();
    if (vn == 0.0) continue;
    v /= vn;

    const VectorPair gp = grad(zp.x, zp.y + h * v);
    const VectorPair gm = grad(zp.x, zp.y - h * v);
    const Eigen::VectorXd fd =
        inner_block ? Eigen::VectorXd((gp.y - gm.y) / (2.0 * h))
                    : Eigen::VectorXd((gp.x - gm.x) / (2.0 * h));
    worst = std::max(worst, relative_error(hvp(zp.x, zp.y, v), fd));
  }
  return worst;
}

}  // namespace bilevel
