#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "feslkit/nlp.hpp"
#include "feslkit/problems.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

using namespace feslkit;

namespace {

NlpProblem scalar_problem(double lo, double hi) {
  // min (x-3)^2  s.t.  x <= 2.
  NlpProblem p;
  p.n = 1;
  p.lower = Eigen::VectorXd::Constant(1, lo);
  p.upper = Eigen::VectorXd::Constant(1, hi);
  p.evaluate = [](const Eigen::VectorXd& x, bool grads) {
    NlpEval e;
    e.objective = (x[0] - 3.0) * (x[0] - 3.0);
    e.constraint_values = Eigen::VectorXd::Constant(1, x[0] - 2.0);
    if (grads) {
      e.objective_gradient = Eigen::VectorXd::Constant(1, 2.0 * (x[0] - 3.0));
      e.constraint_jacobian = Eigen::MatrixXd::Constant(1, 1, 1.0);
    }
    return e;
  };
  return p;
}

void check_kkt_invariants(const NlpProblem& p, const NlpSolution& s,
                          double ctol) {
  CHECK(s.status == SolveStatus::Converged);
  CHECK(s.max_violation <= ctol);
  CHECK(s.multipliers.minCoeff() >= -1e-12);
  const NlpEval e = p.evaluate(s.x, true);
  const KktReport k = kkt_report(e, s.x, p.lower, p.upper, s.multipliers,
                                 s.lower_multipliers, s.upper_multipliers);
  const double lam = 1.0 + s.multipliers.cwiseAbs().maxCoeff();
  CHECK(k.stationarity_norm < 1e-6 * lam);
  CHECK(k.complementarity_norm < 10.0 * ctol * lam);
}

}  // namespace

TEST_CASE("active scalar constraint with known multiplier") {
  const NlpProblem p = scalar_problem(-10.0, 10.0);
  SqpOptions opts;
  opts.constraint_tol = 1e-10;
  const NlpSolution s = solve(p, Eigen::VectorXd::Zero(1), opts);
  CHECK(s.status == SolveStatus::Converged);
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-8));
  // Stationarity 2(x-3) + lambda = 0 at x = 2.
  CHECK(s.multipliers[0] == doctest::Approx(2.0).epsilon(1e-6));
  check_kkt_invariants(p, s, 1e-8);
}

TEST_CASE("objective scaling scales the multiplier, not the solution") {
  for (double scale : {1.0, 100.0, 1e4}) {
    NlpProblem p = scalar_problem(-10.0, 10.0);
    auto base = p.evaluate;
    p.evaluate = [base, scale](const Eigen::VectorXd& x, bool grads) {
      NlpEval e = base(x, grads);
      e.objective *= scale;
      if (grads) e.objective_gradient *= scale;
      return e;
    };
    const NlpSolution s = solve(p, Eigen::VectorXd::Zero(1));
    CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(s.multipliers[0] == doctest::Approx(2.0 * scale).epsilon(1e-5));
  }
}

TEST_CASE("curved constraint boundary") {
  // min x1 + x2  s.t.  1 - x1 x2 <= 0, x in [0.1, 5]^2: optimum (1,1);
  // stationarity 1 - lambda x2 = 0 gives lambda = 1.
  NlpProblem p;
  p.n = 2;
  p.lower = Eigen::VectorXd::Constant(2, 0.1);
  p.upper = Eigen::VectorXd::Constant(2, 5.0);
  p.evaluate = [](const Eigen::VectorXd& x, bool grads) {
    NlpEval e;
    e.objective = x[0] + x[1];
    e.constraint_values = Eigen::VectorXd::Constant(1, 1.0 - x[0] * x[1]);
    if (grads) {
      e.objective_gradient = Eigen::VectorXd::Ones(2);
      e.constraint_jacobian.resize(1, 2);
      e.constraint_jacobian << -x[1], -x[0];
    }
    return e;
  };
  const NlpSolution s = solve(p, Eigen::Vector2d(3.0, 0.2));
  CHECK(s.status == SolveStatus::Converged);
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.multipliers[0] == doctest::Approx(1.0).epsilon(1e-5));
  check_kkt_invariants(p, s, 1e-6);
}

TEST_CASE("quadratic objective with one linear constraint, closed form") {
  // min 0.5 ||x - c||^2  s.t.  a'x <= b with c infeasible:
  // x* = c - a (a'c - b)/||a||^2, lambda = (a'c - b)/||a||^2.
  const Eigen::Vector3d c(2.0, -1.0, 3.0);
  const Eigen::Vector3d a(1.0, 2.0, -1.0);
  const double bb = -4.0;
  NlpProblem p;
  p.n = 3;
  p.lower = Eigen::VectorXd::Constant(3, -50.0);
  p.upper = Eigen::VectorXd::Constant(3, 50.0);
  p.evaluate = [&](const Eigen::VectorXd& x, bool grads) {
    NlpEval e;
    e.objective = 0.5 * (x - c).squaredNorm();
    e.constraint_values = Eigen::VectorXd::Constant(1, a.dot(x) - bb);
    if (grads) {
      e.objective_gradient = x - c;
      e.constraint_jacobian = a.transpose();
    }
    return e;
  };
  const double lam = (a.dot(c) - bb) / a.squaredNorm();
  const Eigen::Vector3d xs = c - lam * a;
  const NlpSolution s = solve(p, Eigen::Vector3d::Zero());
  CHECK(s.status == SolveStatus::Converged);
  CHECK((s.x - xs).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(s.multipliers[0] == doctest::Approx(lam).epsilon(1e-6));
  check_kkt_invariants(p, s, 1e-6);
}

TEST_CASE("bound-constrained minimum reports bound multipliers") {
  // min (x1 + 1)^2 + (x2 - 0.5)^2 over [0, 1]^2: x* = (0, 0.5), the lower
  // bound on x1 is active with multiplier 2.
  NlpProblem p;
  p.n = 2;
  p.lower = Eigen::VectorXd::Zero(2);
  p.upper = Eigen::VectorXd::Ones(2);
  p.evaluate = [](const Eigen::VectorXd& x, bool grads) {
    NlpEval e;
    e.objective = (x[0] + 1.0) * (x[0] + 1.0) + (x[1] - 0.5) * (x[1] - 0.5);
    e.constraint_values = Eigen::VectorXd::Zero(0);
    if (grads) {
      e.objective_gradient =
          Eigen::Vector2d(2.0 * (x[0] + 1.0), 2.0 * (x[1] - 0.5));
      e.constraint_jacobian = Eigen::MatrixXd::Zero(0, 2);
    }
    return e;
  };
  const NlpSolution s = solve(p, Eigen::Vector2d(0.9, 0.9));
  CHECK(s.status == SolveStatus::Converged);
  CHECK(s.x[0] == doctest::Approx(0.0));
  CHECK(s.x[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(s.lower_multipliers[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("infeasible problems are reported, not silently accepted") {
  NlpProblem p;
  p.n = 1;
  p.lower = Eigen::VectorXd::Constant(1, 0.0);
  p.upper = Eigen::VectorXd::Constant(1, 1.0);
  p.evaluate = [](const Eigen::VectorXd& x, bool grads) {
    NlpEval e;
    e.objective = x[0];
    // x >= 2 is impossible inside [0, 1].
    e.constraint_values = Eigen::VectorXd::Constant(1, 2.0 - x[0]);
    if (grads) {
      e.objective_gradient = Eigen::VectorXd::Ones(1);
      e.constraint_jacobian = Eigen::MatrixXd::Constant(1, 1, -1.0);
    }
    return e;
  };
  const NlpSolution s = solve(p, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(s.status != SolveStatus::Converged);
  CHECK(s.max_violation > 0.9);
}

TEST_CASE("out-of-bounds starts are clipped and flagged") {
  const NlpProblem p = scalar_problem(0.0, 4.0);
  const NlpSolution s = solve(p, Eigen::VectorXd::Constant(1, -7.0));
  CHECK(s.x0_clipped);
  CHECK(s.status == SolveStatus::Converged);
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("iteration log fires and reports monotone progress data") {
  NlpProblem p = scalar_problem(-10.0, 10.0);
  SqpOptions opts;
  int calls = 0;
  opts.log = [&](const SqpIterate& it) {
    CHECK(it.iteration == calls);
    CHECK(std::isfinite(it.merit));
    ++calls;
  };
  const NlpSolution s = solve(p, Eigen::VectorXd::Zero(1), opts);
  CHECK(calls >= 1);
  CHECK(calls <= s.iterations);
}

TEST_CASE("first static sub-problem matches a grid-search oracle") {
  // Build the first-order sub-problem of the two-bar benchmark at its
  // starting design and cross-check the SQP minimizer against a dense
  // 400x400 feasibility-filtered grid search refined by local polish.
  const Benchmark b = make_p1();
  const DesignVector anchor{b.x0, b.lower, b.upper};
  const auto resp = b.dynamics()(b.x0, true);
  const EquivalentLoadSet set = compute_equivalent_loads(
      b.model, anchor, resp.front(), LoadVariant::Fesl);
  auto sub_eval = [&](const Eigen::VectorXd& x, bool grads) {
    const WindowResponse r =
        static_response(b.model, DesignVector{x, b.lower, b.upper}, set, grads);
    return b.assembler(x, {r}, grads);
  };

  NlpProblem p{2, b.lower, b.upper, sub_eval};
  SqpOptions opts = b.sqp;
  const NlpSolution s = solve(p, b.x0, opts);
  REQUIRE(s.status == SolveStatus::Converged);

  auto feasible_value = [&](const Eigen::Vector2d& x) {
    const NlpEval e = sub_eval(x, false);
    if (e.constraint_values.size() &&
        e.constraint_values.maxCoeff() > 1e-10)
      return std::numeric_limits<double>::infinity();
    return e.objective;
  };
  Eigen::Vector2d best = b.x0;
  double best_f = std::numeric_limits<double>::infinity();
  const int ng = 400;
  for (int i = 0; i <= ng; ++i)
    for (int j = 0; j <= ng; ++j) {
      const Eigen::Vector2d x(
          b.lower[0] + (b.upper[0] - b.lower[0]) * i / ng,
          b.lower[1] + (b.upper[1] - b.lower[1]) * j / ng);
      const double f = feasible_value(x);
      if (f < best_f) {
        best_f = f;
        best = x;
      }
    }
  // Polish: shrink a local grid around the incumbent.
  double span = (b.upper[0] - b.lower[0]) / ng;
  for (int round = 0; round < 8; ++round) {
    Eigen::Vector2d center = best;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        Eigen::Vector2d x = center + span * 0.1 * Eigen::Vector2d(i, j);
        x = x.cwiseMax(b.lower).cwiseMin(b.upper);
        const double f = feasible_value(x);
        if (f < best_f) {
          best_f = f;
          best = x;
        }
      }
    span *= 0.1;
  }
  CHECK((s.x - best).cwiseAbs().maxCoeff() < 1e-4);
  const NlpEval at = sub_eval(s.x, false);
  CHECK(std::abs(at.objective - best_f) < 1e-4 * (1.0 + std::abs(best_f)));
}
