#include "feslkit/esl.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace feslkit {

EquivalentLoadSet compute_equivalent_loads(const ModelDefinition& model,
                                           const DesignVector& x,
                                           const WindowResponse& dyn,
                                           LoadVariant variant) {
  const SystemMatrices sys = assemble(model, x);
  EquivalentLoadSet set;
  set.anchor = x.values;
  set.variant = variant;
  set.loads = sys.stiffness * dyn.u;
  if (variant == LoadVariant::Fesl) {
    if (static_cast<int>(dyn.du.size()) != model.n_variables())
      throw std::invalid_argument(
          "equivalent loads: first-order variant needs displacement sensitivities");
    set.grad.reserve(dyn.du.size());
    for (int i = 0; i < model.n_variables(); ++i) {
      const MatrixSensitivity ds = assemble_sensitivity(model, x, i);
      set.grad.push_back(ds.dstiffness * dyn.u + sys.stiffness * dyn.du[static_cast<size_t>(i)]);
    }
  }
  return set;
}

Eigen::MatrixXd loads_at(const EquivalentLoadSet& set, const Eigen::VectorXd& x) {
  Eigen::MatrixXd f = set.loads;
  for (size_t i = 0; i < set.grad.size(); ++i)
    f += (x(static_cast<Eigen::Index>(i)) - set.anchor(static_cast<Eigen::Index>(i))) *
         set.grad[i];
  return f;
}

WindowResponse static_response(const ModelDefinition& model,
                               const DesignVector& x,
                               const EquivalentLoadSet& set,
                               bool need_gradients) {
  const SystemMatrices sys = assemble(model, x);
  Eigen::LLT<Eigen::MatrixXd> llt(sys.stiffness);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("static response: stiffness is not positive definite");

  WindowResponse resp;
  resp.u = llt.solve(loads_at(set, x.values));
  if (!need_gradients) return resp;

  resp.du.reserve(static_cast<size_t>(model.n_variables()));
  for (int i = 0; i < model.n_variables(); ++i) {
    const MatrixSensitivity ds = assemble_sensitivity(model, x, i);
    Eigen::MatrixXd rhs = -(ds.dstiffness * resp.u);
    if (set.variant == LoadVariant::Fesl) rhs += set.grad[static_cast<size_t>(i)];
    resp.du.push_back(llt.solve(rhs));
  }
  return resp;
}

OuterResult run_outer_loop(const ModelDefinition& model,
                           const DynamicSolver& dynamics,
                           const ResponseAssembler& assemble_eval,
                           const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper,
                           const Eigen::VectorXd& x0, LoadVariant variant,
                           const OuterOptions& opts) {
  OuterResult out;
  out.x = x0;
  const bool first_order = variant == LoadVariant::Fesl;

  for (int cycle = 0; cycle < opts.max_outer; ++cycle) {
    const Eigen::VectorXd anchor = out.x;
    const DesignVector anchor_design{anchor, lower, upper};
    const std::vector<WindowResponse> dyn = dynamics(anchor, first_order);
    ++out.n_transient_solves;

    std::vector<EquivalentLoadSet> sets;
    sets.reserve(dyn.size());
    for (const WindowResponse& r : dyn)
      sets.push_back(compute_equivalent_loads(model, anchor_design, r, variant));

    NlpProblem sub;
    sub.n = model.n_variables();
    sub.lower = lower;
    sub.upper = upper;
    if (opts.move_limit > 0.0) {
      sub.lower = sub.lower.cwiseMax(anchor * (1.0 - opts.move_limit));
      sub.upper = sub.upper.cwiseMin(anchor * (1.0 + opts.move_limit));
    }
    sub.evaluate = [&](const Eigen::VectorXd& x, bool grads) {
      const DesignVector design{x, lower, upper};
      std::vector<WindowResponse> stat;
      stat.reserve(sets.size());
      for (const EquivalentLoadSet& s : sets)
        stat.push_back(static_response(model, design, s, grads));
      return assemble_eval(x, stat, grads);
    };

    // Warm start at the anchor: the first sub-problem evaluation there
    // reproduces the dynamic displacements exactly.
    NlpSolution inner = solve(sub, anchor, opts.sqp);
    out.last_inner = inner;

    OuterIterationRecord rec;
    rec.x = inner.x;
    rec.step_norm = (inner.x - anchor).norm();
    rec.inner_status = inner.status;
    rec.inner_iterations = inner.iterations;
    rec.max_violation = inner.max_violation;
    rec.objective = sub.evaluate(inner.x, false).objective;
    out.history.push_back(rec);

    out.x = inner.x;
    if (rec.step_norm <= opts.eps) {
      out.converged = true;
      break;
    }
  }
  return out;
}

DirectResult run_direct_dynamic(const DynamicSolver& dynamics,
                                const ResponseAssembler& assemble_eval,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper,
                                const Eigen::VectorXd& x0,
                                const SqpOptions& opts) {
  DirectResult out;
  NlpProblem prob;
  prob.n = static_cast<int>(x0.size());
  prob.lower = lower;
  prob.upper = upper;
  prob.evaluate = [&](const Eigen::VectorXd& x, bool grads) {
    const std::vector<WindowResponse> resp = dynamics(x, grads);
    ++out.n_transient_solves;
    return assemble_eval(x, resp, grads);
  };
  out.solution = solve(prob, x0, opts);
  return out;
}

}  // namespace feslkit
