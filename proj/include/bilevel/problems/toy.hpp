#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "bilevel/problem.hpp"

namespace bilevel {

/// Known solution of a built-in problem instance.
struct Reference {
  VectorPair z_star;
  double f_star = 0.0;
  double g_star = 0.0;
};

/// Two-dimensional inner problem whose minimizers form a line, so the inner
/// argmin is never unique:
///   f(x, y) = 1/2 ||(1, x) - y||^2,   g(x, y) = 1/2 y1^2 - x y1,
/// with x in [-10, 10] and y in [-10, 10]^2. The box keeps the domain compact;
/// all optima are interior. Solution (1, (1, 1)), f* = 0, g* = -1/2.
///
/// Analytic facts used by tests: the inner optimal value is -x^2/2 (attained
/// along y = (x, t) for any t), and the alpha-smoothed inner minimizer is
/// y~*(x) = (x/(1+alpha), 0) with value -x^2 / (2 (1+alpha)).
inline ProblemSpec make_toy1() {
  ProblemSpec p;
  p.dim_x = 1;
  p.dim_y = 2;
  p.set_x = FeasibleSet::cube(1, -10.0, 10.0);
  p.set_y = FeasibleSet::cube(2, -10.0, 10.0);

  p.f_value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double a = 1.0 - y[0];
    const double b = x[0] - y[1];
    return 0.5 * (a * a + b * b);
  };
  p.f_grad = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd gx(1), gy(2);
    gx[0] = x[0] - y[1];
    gy[0] = y[0] - 1.0;
    gy[1] = y[1] - x[0];
    return VectorPair{gx, gy};
  };
  p.g_value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return 0.5 * y[0] * y[0] - x[0] * y[0];
  };
  p.g_grad = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd gx(1), gy(2);
    gx[0] = -y[0];
    gy[0] = y[0] - x[0];
    gy[1] = 0.0;
    return VectorPair{gx, gy};
  };
  p.hvp_g_yy = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(2);
    out[0] = v[0];
    out[1] = 0.0;
    return out;
  };
  p.hvp_g_xy = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(1);
    out[0] = -v[0];
    return out;
  };
  p.hvp_f_yy = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v);
  };
  p.hvp_f_xy = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(1);
    out[0] = -v[1];
    return out;
  };

  // Hessian of g has eigenvalues {(1 +/- sqrt 5)/2, 0}; f has {0, 1, 2}.
  p.constants.rho_g = 0.5 * (1.0 + std::sqrt(5.0));
  p.constants.rho_f = 2.0;
  p.constants.mu = 0.0;
  p.constants.l_g = std::sqrt(500.0);  // grad g = (-y1, y1 - x, 0) on the box
  p.constants.d_z = 20.0 * std::sqrt(3.0);
  p.constants.d_f = 260.5;  // max of f over the box (at y1 = -10, |x - y2| = 20)
  return p;
}

inline Reference toy1_reference() {
  Eigen::VectorXd x(1), y(2);
  x[0] = 1.0;
  y << 1.0, 1.0;
  return Reference{VectorPair{x, y}, 0.0, -0.5};
}

/// Scalar problem with a sinusoidal inner objective, so the inner minima are
/// periodic and g is not convex in y:
///   f(x, y) = (x - a)^2 + (y - a)^2,   g(x, y) = sin(x + y),
/// over [-10, 10]^2. For a = 0 the solution is x = y = -pi/4, f* = pi^2/8.
inline ProblemSpec make_toy2(double a = 0.0) {
  if (std::abs(a) > 5.0) throw std::invalid_argument("make_toy2: |a| must be <= 5");
  ProblemSpec p;
  p.dim_x = 1;
  p.dim_y = 1;
  p.set_x = FeasibleSet::cube(1, -10.0, 10.0);
  p.set_y = FeasibleSet::cube(1, -10.0, 10.0);
  p.violates_inner_convexity = true;

  p.f_value = [a](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double u = x[0] - a;
    const double v = y[0] - a;
    return u * u + v * v;
  };
  p.f_grad = [a](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd gx(1), gy(1);
    gx[0] = 2.0 * (x[0] - a);
    gy[0] = 2.0 * (y[0] - a);
    return VectorPair{gx, gy};
  };
  p.g_value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return std::sin(x[0] + y[0]);
  };
  p.g_grad = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double c = std::cos(x[0] + y[0]);
    Eigen::VectorXd gx(1), gy(1);
    gx[0] = c;
    gy[0] = c;
    return VectorPair{gx, gy};
  };
  p.hvp_g_yy = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(1);
    out[0] = -std::sin(x[0] + y[0]) * v[0];
    return out;
  };
  p.hvp_g_xy = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(1);
    out[0] = -std::sin(x[0] + y[0]) * v[0];
    return out;
  };
  p.hvp_f_yy = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& v) {
    return Eigen::VectorXd(2.0 * v);
  };
  p.hvp_f_xy = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(1));
  };

  p.constants.rho_g = 2.0;  // ||sin''|| * ||[1 1; 1 1]||
  p.constants.rho_f = 2.0;
  p.constants.mu = 2.0;
  p.constants.l_g = std::sqrt(2.0);
  p.constants.d_z = 20.0 * std::sqrt(2.0);
  p.constants.d_f = 2.0 * (10.0 + std::abs(a)) * (10.0 + std::abs(a));
  return p;
}

inline Reference toy2_reference() {
  Eigen::VectorXd x(1), y(1);
  x[0] = -0.25 * M_PI;
  y[0] = -0.25 * M_PI;
  const double f_star = M_PI * M_PI / 8.0;
  return Reference{VectorPair{x, y}, f_star, -1.0};
}

}  // namespace bilevel
