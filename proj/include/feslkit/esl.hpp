#pragma once

#include "feslkit/model.hpp"
#include "feslkit/nlp.hpp"
#include "feslkit/responses.hpp"

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace feslkit {

enum class LoadVariant { Esl, Fesl };

/// Static load set reproducing the dynamic displacement field at one design.
/// For the first-order variant the set also carries the design derivatives of
/// the loads, so they can be extrapolated away from the anchor design.
struct EquivalentLoadSet {
  Eigen::MatrixXd loads;              // ndof x n_window, column per time step
  std::vector<Eigen::MatrixXd> grad;  // per design variable; empty for Esl
  Eigen::VectorXd anchor;
  LoadVariant variant = LoadVariant::Esl;
};

/// Build the load set at design x from a dynamic window response. `dyn.du`
/// must be populated when the first-order variant is requested.
EquivalentLoadSet compute_equivalent_loads(const ModelDefinition& model,
                                           const DesignVector& x,
                                           const WindowResponse& dyn,
                                           LoadVariant variant);

/// Loads evaluated at design x: the stored columns plus, for the first-order
/// variant, the linear extrapolation grad_i * (x_i - anchor_i).
Eigen::MatrixXd loads_at(const EquivalentLoadSet& set, const Eigen::VectorXd& x);

/// Displacements (and, when requested, their design derivatives) of the
/// static problem K(x) u_k = f_k(x) under the given load set. One
/// factorization of K(x) serves every column and every derivative solve.
WindowResponse static_response(const ModelDefinition& model,
                               const DesignVector& x,
                               const EquivalentLoadSet& set,
                               bool need_gradients);

/// Full dynamic analysis at x for every load case; `need_gradients` asks for
/// the per-variable displacement sensitivities in WindowResponse::du.
using DynamicSolver = std::function<std::vector<WindowResponse>(
    const Eigen::VectorXd& x, bool need_gradients)>;

/// Maps a design plus per-load-case window responses to objective and
/// constraints. The same assembler serves the dynamic problem and the static
/// sub-problems, which is what makes the two formulations comparable.
using ResponseAssembler = std::function<NlpEval(
    const Eigen::VectorXd& x, const std::vector<WindowResponse>& responses,
    bool need_gradients)>;

struct OuterOptions {
  double eps = 1e-6;      // stop when ||x_{W+1} - x_W|| <= eps
  int max_outer = 50;
  /// Per-cycle relative design change cap; 0 disables it. Keeps the
  /// sub-problem step inside the region where its load model is trustworthy.
  double move_limit = 0.0;
  SqpOptions sqp;
};

struct OuterIterationRecord {
  Eigen::VectorXd x;
  double objective = 0.0;
  double max_violation = 0.0;
  double step_norm = 0.0;
  SolveStatus inner_status = SolveStatus::MaxIterations;
  int inner_iterations = 0;
};

struct OuterResult {
  Eigen::VectorXd x;
  bool converged = false;
  int n_transient_solves = 0;
  std::vector<OuterIterationRecord> history;
  NlpSolution last_inner;
};

/// Alternates transient analysis at the current design with a statically
/// loaded sub-problem solve, until the design stops moving.
OuterResult run_outer_loop(const ModelDefinition& model,
                           const DynamicSolver& dynamics,
                           const ResponseAssembler& assemble,
                           const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper,
                           const Eigen::VectorXd& x0, LoadVariant variant,
                           const OuterOptions& opts);

struct DirectResult {
  NlpSolution solution;
  int n_transient_solves = 0;
};

/// Reference approach: every optimizer evaluation triggers a transient solve.
DirectResult run_direct_dynamic(const DynamicSolver& dynamics,
                                const ResponseAssembler& assemble,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper,
                                const Eigen::VectorXd& x0,
                                const SqpOptions& opts);

}  // namespace feslkit
