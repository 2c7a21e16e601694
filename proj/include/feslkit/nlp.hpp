#pragma once

#include <Eigen/Dense>
#include <functional>

namespace feslkit {

/// One evaluation of a smooth NLP: objective, inequality constraints
/// (feasible iff <= 0), and their first derivatives when requested.
struct NlpEval {
  double objective = 0.0;
  Eigen::VectorXd objective_gradient;
  Eigen::VectorXd constraint_values;
  Eigen::MatrixXd constraint_jacobian;
};

/// Inequality-constrained NLP with box bounds. The evaluator must be
/// deterministic for fixed x; `need_gradients` lets line searches skip the
/// derivative work.
struct NlpProblem {
  int n = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::function<NlpEval(const Eigen::VectorXd&, bool need_gradients)> evaluate;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible, LineSearchFailure };

struct SqpIterate {
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double merit = 0.0;
  double step_norm = 0.0;
  double step_scale = 0.0;  // accepted line-search fraction
  int working_set_size = 0;
};

struct SqpOptions {
  double constraint_tol = 1e-6;
  double step_tol = 1e-12;
  int max_iterations = 300;
  /// Constraints with value >= -activation_band enter the QP working set.
  double activation_band = 1e-2;
  int max_line_search = 50;
  /// Called once per iteration when set; for logging only.
  std::function<void(const SqpIterate&)> log;
};

struct NlpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;        // one per inequality constraint, >= 0
  Eigen::VectorXd lower_multipliers;  // one per variable, >= 0
  Eigen::VectorXd upper_multipliers;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  int value_evaluations = 0;
  int gradient_evaluations = 0;
  double max_violation = 0.0;
  bool x0_clipped = false;
};

NlpSolution solve(const NlpProblem& problem, Eigen::VectorXd x0,
                  const SqpOptions& opts = {});

/// The four KKT residual groups at a candidate (x, lambda).
struct KktReport {
  double stationarity_norm = 0.0;   // inf-norm of the Lagrangian gradient
  double max_violation = 0.0;       // max_j g_j (clamped at 0)
  double min_multiplier = 0.0;
  double complementarity_norm = 0.0;  // max_j |lambda_j g_j|
};

KktReport kkt_report(const NlpEval& eval, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const Eigen::VectorXd& multipliers,
                     const Eigen::VectorXd& lower_multipliers,
                     const Eigen::VectorXd& upper_multipliers);

const char* to_string(SolveStatus status);

}  // namespace feslkit
