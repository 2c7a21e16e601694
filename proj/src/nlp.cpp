#include "feslkit/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace feslkit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Strictly convex QP  min 1/2 d'G d + a'd  s.t.  C(:,j)'d >= b(j).
/// Dual active-set method of Goldfarb and Idnani. The active-set systems are
/// re-solved from scratch each iteration; with at most n active rows and
/// n <= 7 in every benchmark, incremental factor updates buy nothing.
struct QpResult {
  Eigen::VectorXd d;
  Eigen::VectorXd lambda;  // one per column of C, >= 0
  bool solved = false;
};

QpResult solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& a,
                  const Eigen::MatrixXd& C, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(C.cols());

  Eigen::LLT<Eigen::MatrixXd> glt(G);
  if (glt.info() != Eigen::Success)
    throw std::runtime_error("qp: hessian is not positive definite");

  QpResult out;
  out.lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd d = -glt.solve(a);

  std::vector<int> active;
  Eigen::VectorXd lam_active(0);

  const double bscale = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  const double feas_tol = 1e-11 * bscale;

  const int max_iter = 100 * (m + n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    // Most violated inactive constraint.
    int p = -1;
    double worst = -feas_tol;
    for (int j = 0; j < m; ++j) {
      const double s = C.col(j).dot(d) - b(j);
      if (s < worst) {
        worst = s;
        p = j;
      }
    }
    if (p < 0) {
      out.d = d;
      for (size_t q = 0; q < active.size(); ++q)
        out.lambda(active[q]) = lam_active(static_cast<Eigen::Index>(q));
      out.solved = true;
      return out;
    }

    const Eigen::VectorXd cp = C.col(p);
    double lam_p = 0.0;

    for (int inner = 0; inner < max_iter; ++inner) {
      const int q = static_cast<int>(active.size());
      // Step direction z in primal space and r in the active multipliers.
      Eigen::VectorXd z = glt.solve(cp);
      Eigen::VectorXd r(q);
      if (q > 0) {
        Eigen::MatrixXd N(n, q);
        for (int k = 0; k < q; ++k) N.col(k) = C.col(active[static_cast<size_t>(k)]);
        const Eigen::MatrixXd GiN = glt.solve(N);
        const Eigen::MatrixXd A = N.transpose() * GiN;
        r = A.fullPivLu().solve(N.transpose() * z);
        z -= GiN * r;
      }

      // Dual step length limited by active multipliers dropping to zero.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > 1e-12) {
          const double t = lam_active(k) / r(k);
          if (t < t1) {
            t1 = t;
            drop = k;
          }
        }
      }

      const double zc = z.dot(cp);
      const double slack = cp.dot(d) - b(p);
      const double t2 = zc > 1e-13 * (1.0 + cp.squaredNorm()) ? -slack / zc : kInf;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return out;  // dual unbounded: primal infeasible

      if (std::isfinite(t2)) d += t * z;
      for (int k = 0; k < q; ++k) lam_active(k) -= t * r(k);
      lam_p += t;

      if (t == t2 && std::isfinite(t2)) {
        active.push_back(p);
        lam_active.conservativeResize(q + 1);
        lam_active(q) = lam_p;
        break;
      }
      // Constraint `drop` left the active set; retry constraint p.
      active.erase(active.begin() + drop);
      for (int k = drop; k + 1 < q; ++k) lam_active(k) = lam_active(k + 1);
      lam_active.conservativeResize(q - 1);
    }
  }
  return out;  // cycling guard tripped
}

/// Infeasible-subproblem rescue: minimize the same model plus a heavy linear
/// penalty on a single slack that relaxes every violated row at once.
QpResult solve_elastic_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& a,
                          const Eigen::MatrixXd& C, const Eigen::VectorXd& b,
                          int n_relaxable) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(C.cols());
  const double penalty = 1e6 * (1.0 + a.cwiseAbs().maxCoeff());
  const double curvature = 1e-6 * (1.0 + G.diagonal().maxCoeff());

  Eigen::MatrixXd Ge = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Ge.topLeftCorner(n, n) = G;
  Ge(n, n) = curvature;
  Eigen::VectorXd ae(n + 1);
  ae << a, penalty;

  // Only the nonlinear rows get the slack; bound rows stay hard. One extra
  // row keeps the slack itself nonnegative.
  Eigen::MatrixXd Ce = Eigen::MatrixXd::Zero(n + 1, m + 1);
  Ce.topLeftCorner(n, m) = C;
  for (int j = 0; j < n_relaxable; ++j) Ce(n, j) = 1.0;
  Ce(n, m) = 1.0;
  Eigen::VectorXd be(m + 1);
  be << b, 0.0;

  QpResult inner = solve_qp(Ge, ae, Ce, be);
  QpResult out;
  out.solved = inner.solved;
  if (inner.solved) {
    out.d = inner.d.head(n);
    out.lambda = inner.lambda.head(m);
  }
  return out;
}

double violation_sum(const Eigen::VectorXd& g) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) s += std::max(0.0, g(j));
  return s;
}

}  // namespace

NlpSolution solve(const NlpProblem& problem, Eigen::VectorXd x0,
                  const SqpOptions& opts) {
  const int n = problem.n;
  if (x0.size() != n)
    throw std::invalid_argument("nlp: starting point has wrong dimension");

  NlpSolution sol;
  sol.x0_clipped = false;
  for (int i = 0; i < n; ++i) {
    const double c = std::clamp(x0(i), problem.lower(i), problem.upper(i));
    if (c != x0(i)) sol.x0_clipped = true;
    x0(i) = c;
  }

  Eigen::VectorXd x = x0;
  NlpEval eval = problem.evaluate(x, true);
  ++sol.gradient_evaluations;
  const int m = static_cast<int>(eval.constraint_values.size());

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  double mu = 1.0;
  bool hessian_was_reset = false;

  sol.multipliers = Eigen::VectorXd::Zero(m);
  sol.lower_multipliers = Eigen::VectorXd::Zero(n);
  sol.upper_multipliers = Eigen::VectorXd::Zero(n);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    sol.iterations = iter + 1;
    const Eigen::VectorXd& g = eval.constraint_values;

    // Near-active working set: rows within the activation band (this includes
    // every violated row). The QP only ever activates <= n of them, so the
    // prefilter just keeps the slack scans cheap on the large benchmarks.
    std::vector<int> work;
    for (int j = 0; j < m; ++j)
      if (g(j) >= -opts.activation_band) work.push_back(j);
    const int w = static_cast<int>(work.size());

    Eigen::MatrixXd C(n, w + 2 * n);
    Eigen::VectorXd b(w + 2 * n);
    for (int k = 0; k < w; ++k) {
      C.col(k) = -eval.constraint_jacobian.row(work[static_cast<size_t>(k)]).transpose();
      b(k) = g(work[static_cast<size_t>(k)]);
    }
    for (int i = 0; i < n; ++i) {
      C.col(w + i) = Eigen::VectorXd::Unit(n, i);
      b(w + i) = problem.lower(i) - x(i);
      C.col(w + n + i) = -Eigen::VectorXd::Unit(n, i);
      b(w + n + i) = x(i) - problem.upper(i);
    }

    QpResult qp = solve_qp(B, eval.objective_gradient, C, b);
    if (!qp.solved) qp = solve_elastic_qp(B, eval.objective_gradient, C, b, w);
    if (!qp.solved) {
      sol.status = SolveStatus::Infeasible;
      break;
    }
    const Eigen::VectorXd d = qp.d;

    Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < w; ++k) lam(work[static_cast<size_t>(k)]) = qp.lambda(k);
    sol.multipliers = lam;
    sol.lower_multipliers = qp.lambda.segment(w, n);
    sol.upper_multipliers = qp.lambda.segment(w + n, n);

    const double viol = m > 0 ? std::max(0.0, g.maxCoeff()) : 0.0;
    sol.max_violation = viol;
    const bool tiny_step =
        d.lpNorm<Eigen::Infinity>() <= opts.step_tol * (1.0 + x.lpNorm<Eigen::Infinity>());
    if (tiny_step) {
      // No improving direction left: done if feasible, locally infeasible if
      // the violation cannot be linearized away (elastic solution at d = 0).
      sol.status = viol <= opts.constraint_tol ? SolveStatus::Converged
                                               : SolveStatus::Infeasible;
      break;
    }

    // l1 merit line search; the penalty must dominate the multipliers. The
    // predicted decrease uses the linearized violation at the full step --
    // with an elastic QP solution the violation is reduced, not removed.
    const double lam_inf = m > 0 ? lam.lpNorm<Eigen::Infinity>() : 0.0;
    mu = std::max(mu, 2.0 * lam_inf + 1.0);
    const double vsum0 = violation_sum(g);
    const double vsum_lin =
        m > 0 ? violation_sum(g + eval.constraint_jacobian * d) : 0.0;
    const double gd = eval.objective_gradient.dot(d);
    if (gd - mu * (vsum0 - vsum_lin) >= 0.0 && vsum0 > vsum_lin)
      mu = gd / (vsum0 - vsum_lin) + 1.0;  // feasibility-restoring uphill step
    const double phi0 = eval.objective + mu * vsum0;
    const double descent = gd - mu * (vsum0 - vsum_lin);

    double alpha = 1.0;
    NlpEval trial;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      trial = problem.evaluate(x + alpha * d, false);
      ++sol.value_evaluations;
      const double phi = trial.objective + mu * violation_sum(trial.constraint_values);
      if (phi <= phi0 + 1e-4 * alpha * descent) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // A stale quasi-Newton model is the usual culprit; rebuild it once.
      if (!hessian_was_reset) {
        hessian_was_reset = true;
        B = Eigen::MatrixXd::Identity(n, n);
        continue;
      }
      sol.status = SolveStatus::LineSearchFailure;
      break;
    }
    hessian_was_reset = false;

    const Eigen::VectorXd x_new = x + alpha * d;
    NlpEval eval_new = problem.evaluate(x_new, true);
    ++sol.gradient_evaluations;

    // Damped BFGS on the Lagrangian (bound terms are constant and drop out).
    const Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = eval_new.objective_gradient - eval.objective_gradient;
    for (int k = 0; k < w; ++k) {
      const int j = work[static_cast<size_t>(k)];
      if (lam(j) > 0.0)
        y += lam(j) * (eval_new.constraint_jacobian.row(j) -
                       eval.constraint_jacobian.row(j))
                         .transpose();
    }
    const Eigen::VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    const double sy = s.dot(y);
    if (sBs > 0.0) {
      const double theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
      const Eigen::VectorXd yd = theta * y + (1.0 - theta) * Bs;
      const double syd = s.dot(yd);
      if (syd > 1e-14 * sBs)
        B += yd * yd.transpose() / syd - Bs * Bs.transpose() / sBs;
    }

    if (opts.log) {
      SqpIterate it;
      it.iteration = iter;
      it.objective = eval_new.objective;
      it.max_violation =
          m > 0 ? std::max(0.0, eval_new.constraint_values.maxCoeff()) : 0.0;
      it.merit = eval_new.objective + mu * violation_sum(eval_new.constraint_values);
      it.step_norm = (alpha * d).lpNorm<Eigen::Infinity>();
      it.step_scale = alpha;
      it.working_set_size = w;
      opts.log(it);
    }

    x = x_new;
    eval = eval_new;
  }

  sol.x = x;
  if (m > 0)
    sol.max_violation = std::max(0.0, problem.evaluate(x, false).constraint_values.maxCoeff());
  return sol;
}

KktReport kkt_report(const NlpEval& eval, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const Eigen::VectorXd& multipliers,
                     const Eigen::VectorXd& lower_multipliers,
                     const Eigen::VectorXd& upper_multipliers) {
  KktReport rep;
  Eigen::VectorXd grad_l = eval.objective_gradient;
  if (multipliers.size() > 0)
    grad_l += eval.constraint_jacobian.transpose() * multipliers;
  grad_l -= lower_multipliers;
  grad_l += upper_multipliers;
  rep.stationarity_norm = grad_l.lpNorm<Eigen::Infinity>();

  rep.max_violation = 0.0;
  for (Eigen::Index j = 0; j < eval.constraint_values.size(); ++j)
    rep.max_violation = std::max(rep.max_violation, eval.constraint_values(j));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    rep.max_violation = std::max(rep.max_violation, lower(i) - x(i));
    rep.max_violation = std::max(rep.max_violation, x(i) - upper(i));
  }
  rep.max_violation = std::max(rep.max_violation, 0.0);

  rep.min_multiplier = 0.0;
  if (multipliers.size() > 0)
    rep.min_multiplier = std::min(rep.min_multiplier, multipliers.minCoeff());
  rep.min_multiplier = std::min(rep.min_multiplier, lower_multipliers.minCoeff());
  rep.min_multiplier = std::min(rep.min_multiplier, upper_multipliers.minCoeff());

  rep.complementarity_norm = 0.0;
  for (Eigen::Index j = 0; j < eval.constraint_values.size(); ++j)
    rep.complementarity_norm = std::max(
        rep.complementarity_norm, std::abs(multipliers(j) * eval.constraint_values(j)));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    rep.complementarity_norm = std::max(
        rep.complementarity_norm, std::abs(lower_multipliers(i) * (lower(i) - x(i))));
    rep.complementarity_norm = std::max(
        rep.complementarity_norm, std::abs(upper_multipliers(i) * (x(i) - upper(i))));
  }
  return rep;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

}  // namespace feslkit
