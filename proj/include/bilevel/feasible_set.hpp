#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "bilevel/rng.hpp"

namespace bilevel {

/// Convex, closed, bounded feasible set with closed-form Euclidean projection.
/// Supported shapes: axis-aligned box, Euclidean ball, and finite products.
class FeasibleSet {
 public:
  static FeasibleSet box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size())
      throw std::invalid_argument("FeasibleSet::box: bound dimension mismatch");
    if (lower.size() == 0) throw std::invalid_argument("FeasibleSet::box: empty bounds");
    if (((upper - lower).array() < 0.0).any())
      throw std::invalid_argument("FeasibleSet::box: requires lower <= upper");
    FeasibleSet s;
    s.rep_ = Box{std::move(lower), std::move(upper)};
    return s;
  }

  /// Uniform box [lo, hi]^n.
  static FeasibleSet cube(Eigen::Index n, double lo, double hi) {
    return box(Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi));
  }

  static FeasibleSet ball(Eigen::VectorXd center, double radius) {
    if (center.size() == 0) throw std::invalid_argument("FeasibleSet::ball: empty center");
    if (!(radius > 0.0)) throw std::invalid_argument("FeasibleSet::ball: radius must be > 0");
    FeasibleSet s;
    s.rep_ = Ball{std::move(center), radius};
    return s;
  }

  static FeasibleSet product(std::vector<FeasibleSet> members) {
    if (members.empty()) throw std::invalid_argument("FeasibleSet::product: no members");
    if (members.size() == 1) return std::move(members.front());
    FeasibleSet s;
    s.rep_ = std::move(members);
    return s;
  }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& r) -> Eigen::Index {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Box>) {
            return r.lower.size();
          } else if constexpr (std::is_same_v<T, Ball>) {
            return r.center.size();
          } else {
            Eigen::Index n = 0;
            for (const auto& m : r) n += m.dim();
            return n;
          }
        },
        rep_);
  }

  double diameter() const {
    return std::visit(
        [](const auto& r) -> double {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Box>) {
            return (r.upper - r.lower).norm();
          } else if constexpr (std::is_same_v<T, Ball>) {
            return 2.0 * r.radius;
          } else {
            double sq = 0.0;
            for (const auto& m : r) {
              double d = m.diameter();
              sq += d * d;
            }
            return std::sqrt(sq);
          }
        },
        rep_);
  }

  Eigen::VectorXd center() const {
    Eigen::VectorXd c(dim());
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Box>) {
            c = 0.5 * (r.lower + r.upper);
          } else if constexpr (std::is_same_v<T, Ball>) {
            c = r.center;
          } else {
            Eigen::Index off = 0;
            for (const auto& m : r) {
              c.segment(off, m.dim()) = m.center();
              off += m.dim();
            }
          }
        },
        rep_);
    return c;
  }

  Eigen::VectorXd project(const Eigen::VectorXd& v) const {
    check_dim(v, "project");
    Eigen::VectorXd out(v.size());
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Box>) {
            out = v.cwiseMax(r.lower).cwiseMin(r.upper);
          } else if constexpr (std::is_same_v<T, Ball>) {
            Eigen::VectorXd d = v - r.center;
            double n = d.norm();
            out = (n <= r.radius) ? v : Eigen::VectorXd(r.center + (r.radius / n) * d);
          } else {
            Eigen::Index off = 0;
            for (const auto& m : r) {
              out.segment(off, m.dim()) = m.project(v.segment(off, m.dim()));
              off += m.dim();
            }
          }
        },
        rep_);
    return out;
  }

  bool contains(const Eigen::VectorXd& v, double tol = 1e-9) const {
    check_dim(v, "contains");
    return (v - project(v)).norm() <= tol;
  }

  /// dist(v, -N(z; S)) where N(z; S) is the normal cone at the feasible point z.
  /// Boundary activity is detected with an absolute tolerance of 1e-9.
  double normal_cone_distance(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const {
    check_dim(z, "normal_cone_distance");
    check_dim(v, "normal_cone_distance");
    if (!contains(z, kFeasTol))
      throw std::invalid_argument("normal_cone_distance: point is not feasible");
    return std::sqrt(ncd_squared(z, v));
  }

  /// Uniform sample; ball sampling uses the radial inverse-CDF trick.
  Eigen::VectorXd sample_uniform(SplitMix64& rng) const {
    Eigen::VectorXd out(dim());
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Box>) {
            for (Eigen::Index i = 0; i < out.size(); ++i)
              out[i] = rng.uniform(r.lower[i], r.upper[i]);
          } else if constexpr (std::is_same_v<T, Ball>) {
            Eigen::VectorXd dir(out.size());
            double nrm = 0.0;
            do {
              for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
              nrm = dir.norm();
            } while (nrm == 0.0);
            double u = rng.uniform01();
            double rad = r.radius * std::pow(u, 1.0 / static_cast<double>(out.size()));
            out = r.center + (rad / nrm) * dir;
          } else {
            Eigen::Index off = 0;
            for (const auto& m : r) {
              out.segment(off, m.dim()) = m.sample_uniform(rng);
              off += m.dim();
            }
          }
        },
        rep_);
    return out;
  }

  static constexpr double kFeasTol = 1e-9;

 private:
  struct Box {
    Eigen::VectorXd lower, upper;
  };
  struct Ball {
    Eigen::VectorXd center;
    double radius;
  };

  FeasibleSet() = default;

  void check_dim(const Eigen::VectorXd& v, const char* what) const {
    if (v.size() != dim())
      throw std::invalid_argument(std::string("FeasibleSet::") + what +
                                  ": dimension mismatch");
  }

  double ncd_squared(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const {
    return std::visit(
        [&](const auto& r) -> double {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Box>) {
            double sq = 0.0;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
              const bool at_upper = z[i] >= r.upper[i] - kFeasTol;
              const bool at_lower = z[i] <= r.lower[i] + kFeasTol;
              double c;
              if (at_upper && at_lower) {
                c = 0.0;  // pinned coordinate, normal cone is all of R
              } else if (at_upper) {
                c = std::max(v[i], 0.0);
              } else if (at_lower) {
                c = std::max(-v[i], 0.0);
              } else {
                c = std::abs(v[i]);
              }
              sq += c * c;
            }
            return sq;
          } else if constexpr (std::is_same_v<T, Ball>) {
            Eigen::VectorXd d = z - r.center;
            if (d.norm() < r.radius - kFeasTol) return v.squaredNorm();
            Eigen::VectorXd n = d / d.norm();
            Eigen::VectorXd res = v - std::min(0.0, v.dot(n)) * n;
            return res.squaredNorm();
          } else {
            double sq = 0.0;
            Eigen::Index off = 0;
            for (const auto& m : r) {
              sq += m.ncd_squared(z.segment(off, m.dim()), v.segment(off, m.dim()));
              off += m.dim();
            }
            return sq;
          }
        },
        rep_);
  }

  std::variant<Box, Ball, std::vector<FeasibleSet>> rep_;
};

}  // namespace bilevel
