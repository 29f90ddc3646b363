#include <catch2/catch_amalgamated.hpp>

#include "bilevel/feasible_set.hpp"
#include "bilevel/rng.hpp"

using namespace bilevel;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Independent oracle for dist(v, -N(z; box)): the cone is separable, so grid
// search each coordinate's admissible range.
double box_cone_distance_oracle(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                const Eigen::VectorXd& z, const Eigen::VectorXd& v) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const bool at_upper = z[i] >= hi[i] - 1e-9;
    const bool at_lower = z[i] <= lo[i] + 1e-9;
    const double span = std::abs(v[i]) + 1.0;
    double best = std::numeric_limits<double>::infinity();
    const int n = 200000;
    for (int k = 0; k <= n; ++k) {
      const double w = -span + 2.0 * span * k / n;
      if (at_upper && at_lower) {
        // pinned: any w admissible
      } else if (at_upper) {
        if (w > 0.0) continue;
      } else if (at_lower) {
        if (w < 0.0) continue;
      } else {
        if (w != 0.0) continue;
      }
      best = std::min(best, (v[i] - w) * (v[i] - w));
    }
    if (!std::isfinite(best)) best = v[i] * v[i];  // interior: only w = 0
    sq += best;
  }
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("box projection clamps at bounds") {
  const auto set = FeasibleSet::box(vec1(-10.0), vec1(10.0));
  CHECK(set.project(vec1(12.0))[0] == 10.0);
  CHECK(set.project(vec1(-12.0))[0] == -10.0);
  CHECK(set.project(vec1(3.0))[0] == 3.0);
}

TEST_CASE("ball projection is radial scaling") {
  const auto set = FeasibleSet::ball(Eigen::VectorXd::Zero(2), 1.0);
  const Eigen::VectorXd p = set.project(vec2(3.0, 4.0));
  CHECK(p[0] == Catch::Approx(0.6).margin(1e-15));
  CHECK(p[1] == Catch::Approx(0.8).margin(1e-15));
}

TEST_CASE("projection is idempotent and fixes feasible points") {
  SplitMix64 rng(7);
  const auto set = FeasibleSet::product(
      {FeasibleSet::cube(2, -2.0, 3.0), FeasibleSet::ball(vec2(1.0, -1.0), 2.0)});
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd v(4);
    for (int j = 0; j < 4; ++j) v[j] = rng.uniform(-8.0, 8.0);
    const Eigen::VectorXd p = set.project(v);
    CHECK((set.project(p) - p).norm() <= 1e-12);
    CHECK(set.contains(p, 1e-9));
  }
  const Eigen::VectorXd inside = set.center();
  CHECK((set.project(inside) - inside).norm() == 0.0);
}

TEST_CASE("projection is nonexpansive") {
  SplitMix64 rng(11);
  const auto set = FeasibleSet::product(
      {FeasibleSet::cube(3, -1.0, 1.0), FeasibleSet::ball(Eigen::VectorXd::Zero(2), 0.5)});
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd u(5), v(5);
    for (int j = 0; j < 5; ++j) {
      u[j] = rng.uniform(-4.0, 4.0);
      v[j] = rng.uniform(-4.0, 4.0);
    }
    CHECK((set.project(u) - set.project(v)).norm() <= (u - v).norm() + 1e-12);
  }
}

TEST_CASE("diameters") {
  CHECK(FeasibleSet::cube(1, -10.0, 10.0).diameter() == Catch::Approx(20.0));
  CHECK(FeasibleSet::ball(Eigen::VectorXd::Zero(3), 2.0).diameter() == Catch::Approx(4.0));
  const auto prod = FeasibleSet::product(
      {FeasibleSet::cube(1, -10.0, 10.0), FeasibleSet::cube(2, -10.0, 10.0)});
  CHECK(prod.diameter() == Catch::Approx(20.0 * std::sqrt(3.0)));
}

TEST_CASE("normal cone distance, interior point") {
  const auto set = FeasibleSet::box(vec1(-1.0), vec1(1.0));
  CHECK(set.normal_cone_distance(vec1(0.0), vec1(0.5)) == Catch::Approx(0.5));
}

TEST_CASE("normal cone distance at the upper bound") {
  const auto set = FeasibleSet::box(vec1(-1.0), vec1(1.0));
  const double d = set.normal_cone_distance(vec1(1.0), vec1(-2.0));
  CHECK(d == Catch::Approx(0.0).margin(1e-12));
  CHECK(d == Catch::Approx(box_cone_distance_oracle(vec1(-1.0), vec1(1.0), vec1(1.0),
                                                    vec1(-2.0)))
                 .margin(2e-5));
}

TEST_CASE("normal cone distance, mixed active set") {
  const auto set = FeasibleSet::box(vec2(-1.0, -1.0), vec2(1.0, 1.0));
  const double d = set.normal_cone_distance(vec2(1.0, 0.0), vec2(-2.0, 0.3));
  CHECK(d == Catch::Approx(0.3));
  CHECK(d == Catch::Approx(box_cone_distance_oracle(vec2(-1.0, -1.0), vec2(1.0, 1.0),
                                                    vec2(1.0, 0.0), vec2(-2.0, 0.3)))
                 .margin(2e-5));
}

TEST_CASE("normal cone distance against the grid oracle on random cases") {
  SplitMix64 rng(23);
  const Eigen::VectorXd lo = vec2(-1.0, -2.0);
  const Eigen::VectorXd hi = vec2(1.5, 0.5);
  const auto set = FeasibleSet::box(lo, hi);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd z = set.sample_uniform(rng);
    if (i % 3 != 0) {
      const Eigen::Index j = i % 2;
      z[j] = (rng.uniform01() < 0.5) ? lo[j] : hi[j];
    }
    z = set.project(z);
    const Eigen::VectorXd v = vec2(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    const double d = set.normal_cone_distance(z, v);
    const double oracle = box_cone_distance_oracle(lo, hi, z, v);
    CHECK(d == Catch::Approx(oracle).margin(5e-5));
  }
}

TEST_CASE("normal cone distance on the ball boundary") {
  const auto set = FeasibleSet::ball(Eigen::VectorXd::Zero(2), 1.0);
  // Outward normal at (1, 0) is (1, 0); -N is its nonpositive span.
  CHECK(set.normal_cone_distance(vec2(1.0, 0.0), vec2(-3.0, 0.0)) ==
        Catch::Approx(0.0).margin(1e-12));
  CHECK(set.normal_cone_distance(vec2(1.0, 0.0), vec2(0.0, 0.7)) == Catch::Approx(0.7));
  CHECK(set.normal_cone_distance(vec2(1.0, 0.0), vec2(2.0, 0.0)) == Catch::Approx(2.0));
  CHECK(set.normal_cone_distance(vec2(0.0, 0.0), vec2(0.3, -0.4)) == Catch::Approx(0.5));
}

TEST_CASE("infeasible point rejected by normal_cone_distance") {
  const auto set = FeasibleSet::box(vec1(-1.0), vec1(1.0));
  CHECK_THROWS_AS(set.normal_cone_distance(vec1(1.5), vec1(0.0)), std::invalid_argument);
}

TEST_CASE("zero cone distance matches projection fixed point") {
  SplitMix64 rng(31);
  const auto set = FeasibleSet::product(
      {FeasibleSet::cube(2, -1.0, 1.0), FeasibleSet::ball(Eigen::VectorXd::Zero(2), 1.0)});
  const double s = 1e-6;
  int boundary_cases = 0;
  for (int i = 0; i < 300; ++i) {
    Eigen::VectorXd z(4);
    for (int j = 0; j < 4; ++j) z[j] = rng.uniform(-1.4, 1.4);
    z = set.project(z);
    Eigen::VectorXd v(4);
    for (int j = 0; j < 4; ++j) v[j] = rng.uniform(-2.0, 2.0);

    const double d = set.normal_cone_distance(z, v);
    const double moved = (set.project(z - s * v) - z).norm() / s;
    if ((z - set.center()).norm() > 0.9) ++boundary_cases;
    if (d <= 1e-9) {
      CHECK(moved <= 1e-6);
    } else if (d > 1e-3) {
      CHECK(moved > 1e-6);
    }
  }
  CHECK(boundary_cases > 0);
}

TEST_CASE("members of -N produce zero distance") {
  const auto set = FeasibleSet::box(vec2(-1.0, -1.0), vec2(1.0, 1.0));
  // At (1, -1): -N = {(a, b) : a <= 0, b >= 0}.
  CHECK(set.normal_cone_distance(vec2(1.0, -1.0), vec2(-0.5, 2.0)) ==
        Catch::Approx(0.0).margin(1e-12));
  CHECK((set.project(vec2(1.0, -1.0) - 1e-6 * vec2(-0.5, 2.0)) - vec2(1.0, -1.0)).norm() ==
        0.0);
}

TEST_CASE("dimension mismatch is a hard error") {
  const auto set = FeasibleSet::cube(2, -1.0, 1.0);
  CHECK_THROWS_AS(set.project(vec1(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(FeasibleSet::box(vec1(1.0), vec1(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(FeasibleSet::ball(vec1(0.0), 0.0), std::invalid_argument);
}
