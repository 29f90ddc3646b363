#pragma once

#include <Eigen/Core>
#include <cmath>

namespace bilevel {

/// Joint primal variable z = (x, y) with separate outer/inner blocks.
/// All arithmetic acts on the concatenation in R^{p+d}.
struct VectorPair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  VectorPair() = default;
  VectorPair(Eigen::VectorXd x_in, Eigen::VectorXd y_in)
      : x(std::move(x_in)), y(std::move(y_in)) {}

  Eigen::Index dim() const { return x.size() + y.size(); }

  double squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }

  double dot(const VectorPair& o) const { return x.dot(o.x) + y.dot(o.y); }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd v(dim());
    v.head(x.size()) = x;
    v.tail(y.size()) = y;
    return v;
  }

  static VectorPair from_flat(const Eigen::VectorXd& v, Eigen::Index p) {
    return {v.head(p), v.tail(v.size() - p)};
  }

  static VectorPair zero(Eigen::Index p, Eigen::Index d) {
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(d)};
  }

  VectorPair& operator+=(const VectorPair& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  VectorPair& operator-=(const VectorPair& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  VectorPair& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend VectorPair operator+(VectorPair a, const VectorPair& b) { return a += b; }
  friend VectorPair operator-(VectorPair a, const VectorPair& b) { return a -= b; }
  friend VectorPair operator*(double s, VectorPair a) { return a *= s; }
  friend VectorPair operator*(VectorPair a, double s) { return a *= s; }

  bool all_finite() const { return x.allFinite() && y.allFinite(); }
};

}  // namespace bilevel
