#pragma once

#include <cmath>
#include <stdexcept>

namespace bilevel {

/// Per-iteration stepsizes and averaging weights for the primal-dual loop.
///
/// Theory mode generates, for strong-convexity modulus mu > 0,
///   gamma_t = t + t0 + 1,
///   eta_t   = mu (t + t0 + 1) / 2,
///   tau_t   = 4 L_g^2 / (mu t)   (tau_0 := tau_1),
///   theta_t = (t + t0) / (t + t0 + 1),
/// with t0 = 2 (rho_f_eff + B rho_h_eff) / mu. These satisfy
/// gamma_{t+1} theta_{t+1} = gamma_t and gamma_t tau_t >= gamma_{t+1} tau_{t+1}.
///
/// Constant mode takes the primal and dual stepsizes (1/eta, 1/tau) directly
/// and uses uniform output weights.
class Schedule {
 public:
  enum class Mode { Theory, Constant };

  static Schedule theory(double mu, double rho_f_eff, double rho_h_eff, double l_g,
                         double dual_bound) {
    if (!(mu > 0.0)) throw std::invalid_argument("Schedule::theory: mu must be > 0");
    if (!(l_g > 0.0)) throw std::invalid_argument("Schedule::theory: l_g must be > 0");
    if (!(dual_bound > 0.0))
      throw std::invalid_argument("Schedule::theory: dual bound must be > 0");
    Schedule s;
    s.mode_ = Mode::Theory;
    s.mu_ = mu;
    s.l_g_ = l_g;
    s.t0_ = 2.0 * (rho_f_eff + dual_bound * rho_h_eff) / mu;
    return s;
  }

  static Schedule constant(double primal_step, double dual_step, double theta) {
    if (!(primal_step >= 0.0) || !(dual_step >= 0.0))
      throw std::invalid_argument("Schedule::constant: stepsizes must be >= 0");
    Schedule s;
    s.mode_ = Mode::Constant;
    s.primal_step_ = primal_step;
    s.dual_step_ = dual_step;
    s.theta_const_ = theta;
    return s;
  }

  Mode mode() const { return mode_; }
  bool is_theory() const { return mode_ == Mode::Theory; }
  double t0() const { return t0_; }

  double gamma(long t) const {
    return is_theory() ? static_cast<double>(t) + t0_ + 1.0 : 1.0;
  }

  double eta(long t) const {
    if (!is_theory()) return primal_step_ > 0.0 ? 1.0 / primal_step_
                                                : std::numeric_limits<double>::infinity();
    return 0.5 * mu_ * (static_cast<double>(t) + t0_ + 1.0);
  }

  double tau(long t) const {
    if (!is_theory()) return dual_step_ > 0.0 ? 1.0 / dual_step_
                                              : std::numeric_limits<double>::infinity();
    const double tt = static_cast<double>(t < 1 ? 1 : t);
    return 4.0 * l_g_ * l_g_ / (mu_ * tt);
  }

  double theta(long t) const {
    if (!is_theory()) return theta_const_;
    return (static_cast<double>(t) + t0_) / (static_cast<double>(t) + t0_ + 1.0);
  }

 private:
  Schedule() = default;

  Mode mode_ = Mode::Constant;
  double mu_ = 0.0;
  double l_g_ = 0.0;
  double t0_ = 0.0;
  double primal_step_ = 0.0;
  double dual_step_ = 0.0;
  double theta_const_ = 0.0;
};

}  // namespace bilevel
