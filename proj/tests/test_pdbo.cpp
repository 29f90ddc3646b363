#include <catch2/catch_amalgamated.hpp>

#include "bilevel/metrics.hpp"
#include "bilevel/pdbo.hpp"
#include "bilevel/problems/toy.hpp"

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

PdboConfig paper_experiment_config(const VectorPair& z0) {
  PdboConfig cfg;
  cfg.smoothing = SmoothingParams(1e-3, 1e-3);
  cfg.schedule = Schedule::constant(0.2, 0.1, 0.0);
  cfg.n_inner = 5;
  cfg.t_max = 1000;
  cfg.z_init = z0;
  cfg.lambda_init = 2.0;
  return cfg;
}

}  // namespace

TEST_CASE("dual step clamps at zero under strictly feasible drive") {
  CHECK(dual_step(0.0, -1.0, -1.0, 10.0, 0.5, 5.0) == 0.0);
}

TEST_CASE("dual step direct evaluation") {
  CHECK(dual_step(2.0, 0.5, 0.5, 10.0, 0.0, 100.0) == Catch::Approx(2.05));
}

TEST_CASE("dual step clamps at the cap") {
  CHECK(dual_step(5.0, 1.0, 1.0, 1.0, 0.3, 5.0) == 5.0);
  CHECK_THROWS_AS(dual_step(1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0, 0.0, 5.0),
                  std::runtime_error);
}

TEST_CASE("primal step keeps a stationary point fixed") {
  const ProblemSpec p = make_toy1();
  const VectorPair z{vec1(1.0), vec2(1.0, 1.0)};  // grad f = 0 there
  const VectorPair grad_h{vec1(3.0), vec2(-1.0, 2.0)};
  const VectorPair out = primal_step(p, z, 0.0, grad_h, 5.0);
  CHECK((out - z).norm() == 0.0);
}

TEST_CASE("primal step, hand-evaluated iterate") {
  const ProblemSpec p = make_toy1();
  const SmoothingParams a0(0.0, 0.0);
  const VectorPair z{vec1(2.0), vec2(0.5, 0.5)};
  const InnerSolveResult inner = inner_pgd(p, a0, z.x, 200, vec2(0.0, 0.0));
  const VectorPair grad_h = constraint_grad_estimate(p, a0, z, inner);
  CHECK(grad_h.x[0] == Catch::Approx(1.5).margin(1e-9));
  CHECK(grad_h.y[0] == Catch::Approx(-1.5).margin(1e-12));
  const VectorPair out = primal_step(p, z, 2.0, grad_h, 5.0);  // stepsize 0.2
  CHECK(out.x[0] == Catch::Approx(1.1).margin(1e-9));
  CHECK(out.y[0] == Catch::Approx(1.2).margin(1e-9));
  CHECK(out.y[1] == Catch::Approx(0.8).margin(1e-9));
}

TEST_CASE("primal step with infinite eta leaves the iterate unchanged") {
  const ProblemSpec p = make_toy1();
  const VectorPair z{vec1(2.0), vec2(0.5, 0.5)};
  const VectorPair grad_h{vec1(1.0), vec2(1.0, 1.0)};
  const VectorPair out =
      primal_step(p, z, 1.0, grad_h, std::numeric_limits<double>::infinity());
  CHECK((out - z).norm() == 0.0);
}

TEST_CASE("pdbo reaches the multiple-minima solution from both starts") {
  const ProblemSpec p = make_toy1();
  const Reference ref = toy1_reference();
  for (const VectorPair& z0 :
       {VectorPair{vec1(2.0), vec2(0.5, 0.5)}, VectorPair{vec1(0.0), vec2(2.0, 2.0)}}) {
    const PdboResult r = run_pdbo(p, paper_experiment_config(z0));
    CHECK((r.z_last.x - ref.z_star.x).norm() <= 1e-2);
    CHECK((r.z_last.y - ref.z_star.y).norm() <= 5e-2);
  }
}

TEST_CASE("pdbo iterates stay feasible and the dual stays in range") {
  const ProblemSpec p = make_toy1();
  PdboConfig cfg = paper_experiment_config({vec1(2.0), vec2(0.5, 0.5)});
  cfg.t_max = 300;
  const PdboResult r = run_pdbo(p, cfg);
  const double bound = default_dual_bound(p.constants, cfg.smoothing);
  for (const auto& rec : r.trajectory) {
    CHECK(rec.lambda >= 0.0);
    CHECK(rec.lambda <= bound);
  }
  CHECK(p.joint_set().contains(r.z_last.flatten(), 1e-9));
  CHECK(p.joint_set().contains(r.z_bar.flatten(), 1e-9));
}

TEST_CASE("pdbo is deterministic") {
  const ProblemSpec p = make_toy1();
  PdboConfig cfg = paper_experiment_config({vec1(2.0), vec2(0.5, 0.5)});
  cfg.t_max = 200;
  const PdboResult a = run_pdbo(p, cfg);
  const PdboResult b = run_pdbo(p, cfg);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].f_value == b.trajectory[i].f_value);
    CHECK(a.trajectory[i].h_hat == b.trajectory[i].h_hat);
    CHECK(a.trajectory[i].lambda == b.trajectory[i].lambda);
    CHECK(a.trajectory[i].step_norm == b.trajectory[i].step_norm);
  }
  CHECK((a.z_bar - b.z_bar).norm() == 0.0);
}

TEST_CASE("pdbo gradient-call accounting is exact") {
  const ProblemSpec p = make_toy1();
  PdboConfig cfg = paper_experiment_config({vec1(2.0), vec2(0.5, 0.5)});
  cfg.t_max = 137;
  cfg.n_inner = 4;
  const PdboResult r = run_pdbo(p, cfg);
  CHECK(r.calls.f_grad == cfg.t_max);
  // One per inner step, one for the joint gradient, one for the shifted
  // outer gradient.
  CHECK(r.calls.g_grad == cfg.t_max * (cfg.n_inner + 1) + cfg.t_max);
  CHECK(r.calls.g_value == 2 * cfg.t_max);
}

TEST_CASE("record_every thins the trajectory but not the average") {
  const ProblemSpec p = make_toy1();
  PdboConfig cfg = paper_experiment_config({vec1(2.0), vec2(0.5, 0.5)});
  cfg.t_max = 100;
  const PdboResult dense = run_pdbo(p, cfg);
  cfg.record_every = 10;
  const PdboResult thin = run_pdbo(p, cfg);
  CHECK(thin.trajectory.size() == 11);  // every 10th plus the final iteration
  CHECK((dense.z_bar - thin.z_bar).norm() == 0.0);
  CHECK(thin.trajectory.back().t == 99);
}

TEST_CASE("weighted average lies in the convex hull of iterates") {
  const ProblemSpec p = make_toy1();
  PdboConfig cfg = paper_experiment_config({vec1(-3.0), vec2(-2.0, 4.0)});
  cfg.t_max = 50;
  const PdboResult r = run_pdbo(p, cfg);
  CHECK(p.joint_set().contains(r.z_bar.flatten(), 1e-9));
}

TEST_CASE("invalid configs are rejected") {
  const ProblemSpec p = make_toy1();
  PdboConfig cfg = paper_experiment_config({vec1(0.0), vec2(0.0, 0.0)});
  cfg.t_max = 0;
  CHECK_THROWS_AS(run_pdbo(p, cfg), std::invalid_argument);
  cfg.t_max = 10;
  cfg.lambda_init = -1.0;
  CHECK_THROWS_AS(run_pdbo(p, cfg), std::invalid_argument);
}

TEST_CASE("callback errors carry the iteration index") {
  ProblemSpec p = make_toy1();
  int calls = 0;
  p.f_grad = [&calls](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (++calls > 3) throw std::runtime_error("callback exploded");
    Eigen::VectorXd gx(1), gy(2);
    gx[0] = x[0] - y[1];
    gy[0] = y[0] - 1.0;
    gy[1] = y[1] - x[0];
    return VectorPair{gx, gy};
  };
  PdboConfig cfg = paper_experiment_config({vec1(2.0), vec2(0.5, 0.5)});
  cfg.t_max = 10;
  try {
    run_pdbo(p, cfg);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("iteration 3") != std::string::npos);
  }
}
