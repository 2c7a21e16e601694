#include "feslkit/esl.hpp"
#include "feslkit/model.hpp"
#include "feslkit/nlp.hpp"
#include "feslkit/problems.hpp"
#include "feslkit/report.hpp"
#include "feslkit/responses.hpp"
#include "feslkit/sensitivity.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace feslkit;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

Eigen::VectorXd parse_x0(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Benchmark make_benchmark(const std::string& id, const std::string& record_path,
                         bool* synthetic) {
  if (id == "p1") return make_p1();
  if (id == "p3") return make_p3();
  if (id != "p2") throw CLI::ValidationError("--problem", "unknown problem id: " + id);
  const TimeGrid grid{0.02, 1000, 0, 1000};
  if (!record_path.empty()) {
    bool implausible = false;
    const Eigen::VectorXd rec = load_ground_motion(record_path, grid, &implausible);
    if (implausible)
      std::cerr << "warning: record " << record_path
                << " has samples above 100 m/s^2; check units\n";
    *synthetic = false;
    return make_p2(rec);
  }
  *synthetic = true;
  std::cerr << "note: no ground motion record supplied; using the built-in "
               "synthetic record (results are not comparable to measured-record "
               "references)\n";
  return make_p2(synthetic_ground_motion(grid));
}

/// Dynamic-gradient evaluation at a design, for reports and KKT checks.
NlpEval dynamic_eval(const Benchmark& b, const DynamicSolver& dyn,
                     const Eigen::VectorXd& x, bool grads) {
  return b.assembler(x, dyn(x, grads), grads);
}

void write_response_csvs(const Benchmark& b, const Eigen::VectorXd& x,
                         const std::filesystem::path& dir) {
  const DynamicSolver dyn = b.dynamics();
  const std::vector<WindowResponse> resp = dyn(x, true);
  const TimeGrid& grid = b.grid;
  const int nw = grid.n_window();
  const int n = b.model.n_variables();

  Eigen::VectorXd time(nw);
  for (int k = 0; k < nw; ++k) time[k] = grid.time(grid.window_start + k);

  if (b.id == "p2") {
    Eigen::Matrix2d D;
    D << 1, 0, -1, 1;
    Eigen::MatrixXd cols(nw, 3);
    cols.col(0) = time;
    for (int k = 0; k < nw; ++k)
      cols.row(k).tail(2) = (D * resp.front().u.col(k)).transpose();
    write_csv((dir / "drift_history.csv").string(),
              {"time_s", "drift_story1_m", "drift_story2_m"}, cols);
  }
  if (b.id == "p3") {
    const DesignVector design{x, b.lower, b.upper};
    for (size_t l = 0; l < resp.size(); ++l) {
      const StressState state = axial_stress(b.model, design, resp[l]);
      const int nbars = static_cast<int>(state.sigma.rows());
      Eigen::MatrixXd cols(nw, nbars + 1);
      cols.col(0) = time;
      cols.rightCols(nbars) = state.sigma.transpose();
      std::vector<std::string> names{"time_s"};
      for (int bar = 0; bar < nbars; ++bar)
        names.push_back("sigma_bar" + std::to_string(bar + 1) + "_pa");
      write_csv((dir / ("stress_case" + std::to_string(l + 1) + ".csv")).string(),
                names, cols);
    }
  }

  // Static-vs-dynamic displacement sensitivities and the equivalent-load
  // design gradient, both at the final design (first DOF as the channel).
  const DesignVector design{x, b.lower, b.upper};
  const EquivalentLoadSet esl =
      compute_equivalent_loads(b.model, design, resp.front(), LoadVariant::Esl);
  const EquivalentLoadSet fesl =
      compute_equivalent_loads(b.model, design, resp.front(), LoadVariant::Fesl);
  const WindowResponse stat_esl = static_response(b.model, design, esl, true);
  const WindowResponse stat_fesl = static_response(b.model, design, fesl, true);

  Eigen::MatrixXd sens(nw, 1 + 3 * n);
  std::vector<std::string> sens_names{"time_s"};
  sens.col(0) = time;
  for (int i = 0; i < n; ++i) {
    sens.col(1 + 3 * i) = resp.front().du[static_cast<size_t>(i)].row(0).transpose();
    sens.col(2 + 3 * i) = stat_esl.du[static_cast<size_t>(i)].row(0).transpose();
    sens.col(3 + 3 * i) = stat_fesl.du[static_cast<size_t>(i)].row(0).transpose();
    const std::string v = std::to_string(i + 1);
    sens_names.push_back("du_dx" + v + "_dynamic");
    sens_names.push_back("du_dx" + v + "_static");
    sens_names.push_back("du_dx" + v + "_static_first_order");
  }
  write_csv((dir / "sensitivity_comparison.csv").string(), sens_names, sens);

  Eigen::MatrixXd gradcols(nw, 1 + n);
  std::vector<std::string> grad_names{"time_s"};
  gradcols.col(0) = time;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < nw; ++k)
      gradcols(k, 1 + i) =
          fesl.grad[static_cast<size_t>(i)].col(k).lpNorm<Eigen::Infinity>();
    grad_names.push_back("grad_feq_dx" + std::to_string(i + 1) + "_inf");
  }
  write_csv((dir / "equivalent_load_gradient.csv").string(), grad_names, gradcols);
}

int run_command(const std::string& problem, const std::string& method,
                const std::string& x0_csv, std::optional<double> eps,
                const std::string& record_path, const std::string& out_dir) {
  bool synthetic = false;
  Benchmark b = make_benchmark(problem, record_path, &synthetic);
  if (!x0_csv.empty()) {
    const Eigen::VectorXd x0 = parse_x0(x0_csv);
    if (x0.size() != b.model.n_variables())
      throw CLI::ValidationError("--x0", "expected " +
                                             std::to_string(b.model.n_variables()) +
                                             " comma-separated values");
    b.x0 = x0;
  }
  if (eps) b.eps = *eps;

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  const DynamicSolver dyn = b.dynamics();
  RunReport rep;
  rep.problem = b.id;
  rep.method = method;
  rep.synthetic_record = synthetic && b.id == "p2";

  const auto t0 = std::chrono::steady_clock::now();
  Eigen::VectorXd multipliers, lower_mult, upper_mult;
  if (method == "direct") {
    const DirectResult res =
        run_direct_dynamic(dyn, b.assembler, b.lower, b.upper, b.x0, b.sqp);
    rep.x_final = res.solution.x;
    rep.n_transient_solves = res.n_transient_solves;
    rep.converged = res.solution.status == SolveStatus::Converged;
    rep.solver_status = res.solution.status;
    multipliers = res.solution.multipliers;
    lower_mult = res.solution.lower_multipliers;
    upper_mult = res.solution.upper_multipliers;
  } else {
    const LoadVariant variant =
        method == "fesl" ? LoadVariant::Fesl : LoadVariant::Esl;
    OuterOptions oo;
    oo.eps = b.eps;
    oo.max_outer = b.max_outer;
    oo.move_limit = b.move_limit;
    oo.sqp = b.sqp;
    const OuterResult res = run_outer_loop(b.model, dyn, b.assembler, b.lower,
                                           b.upper, b.x0, variant, oo);
    rep.x_final = res.x;
    rep.n_transient_solves = res.n_transient_solves;
    rep.outer_iterations = static_cast<int>(res.history.size());
    rep.converged = res.converged;
    rep.solver_status = res.last_inner.status;
    rep.history = res.history;
    multipliers = res.last_inner.multipliers;
    lower_mult = res.last_inner.lower_multipliers;
    upper_mult = res.last_inner.upper_multipliers;
  }

  const NlpEval final_eval = dynamic_eval(b, dyn, rep.x_final, true);
  rep.objective = final_eval.objective;
  rep.max_constraint = final_eval.constraint_values.maxCoeff();
  rep.kkt = kkt_report(final_eval, rep.x_final, b.lower, b.upper, multipliers,
                       lower_mult, upper_mult);
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream json_out(dir / "report.json");
  json_out << to_json(rep).dump(2) << "\n";
  if (!rep.history.empty())
    write_history_csv((dir / "iteration_history.csv").string(), rep.history);
  write_response_csvs(b, rep.x_final, dir);

  std::cout << "problem " << rep.problem << " method " << rep.method
            << "\n  x* = " << rep.x_final.transpose()
            << "\n  objective = " << rep.objective
            << "\n  max constraint = " << rep.max_constraint
            << "\n  transient solves = " << rep.n_transient_solves
            << "\n  kkt stationarity = " << rep.kkt.stationarity_norm
            << "\n  status = " << to_string(rep.solver_status)
            << (rep.converged ? "" : " (NOT converged)") << "\n";
  return rep.converged ? kExitOk : kExitNumerical;
}

struct Check {
  std::string problem;
  std::string name;
  std::function<bool()> fn;
};

int verify_command(const std::string& problem_filter) {
  std::vector<Check> checks;

  checks.push_back({"p1", "direct sensitivity matches finite differences", [] {
    Benchmark b = make_p1();
    const DynamicSolver dyn = b.dynamics();
    const DesignVector x{b.x0, b.lower, b.upper};
    const std::vector<WindowResponse> resp = dyn(b.x0, true);
    auto solve_at = [&](const Eigen::VectorXd& xv) {
      const SystemMatrices sys = assemble(b.model, {xv, b.lower, b.upper});
      return newmark_solve(sys, b.load_cases(x).front(), b.grid);
    };
    for (int i = 0; i < b.model.n_variables(); ++i) {
      const SensitivityHistory fd = fd_response_gradient(solve_at, x, i, 1e-6);
      const Eigen::MatrixXd fd_win =
          fd.lambda.middleCols(b.grid.window_start, b.grid.n_window());
      const double rel = (resp.front().du[static_cast<size_t>(i)] - fd_win).norm() /
                         fd_win.norm();
      if (rel > 1e-5) return false;
    }
    return true;
  }});

  checks.push_back({"p1", "anchor displacements reproduced by both load variants", [] {
    Benchmark b = make_p1();
    const DynamicSolver dyn = b.dynamics();
    const DesignVector x{b.x0, b.lower, b.upper};
    const std::vector<WindowResponse> resp = dyn(b.x0, true);
    for (const LoadVariant v : {LoadVariant::Esl, LoadVariant::Fesl}) {
      const EquivalentLoadSet set =
          compute_equivalent_loads(b.model, x, resp.front(), v);
      const WindowResponse stat = static_response(b.model, x, set, false);
      if ((stat.u - resp.front().u).norm() > 1e-10 * resp.front().u.norm())
        return false;
    }
    return true;
  }});

  checks.push_back({"p1", "first-order loads match dynamic sensitivities at the anchor", [] {
    Benchmark b = make_p1();
    const DynamicSolver dyn = b.dynamics();
    const Eigen::Vector2d anchor(0.1, 0.6);
    const DesignVector x{anchor, b.lower, b.upper};
    const std::vector<WindowResponse> resp = dyn(anchor, true);
    const EquivalentLoadSet fesl =
        compute_equivalent_loads(b.model, x, resp.front(), LoadVariant::Fesl);
    const WindowResponse stat = static_response(b.model, x, fesl, true);
    const EquivalentLoadSet esl =
        compute_equivalent_loads(b.model, x, resp.front(), LoadVariant::Esl);
    const WindowResponse stat0 = static_response(b.model, x, esl, true);
    for (int i = 0; i < 2; ++i) {
      const Eigen::MatrixXd& dy = resp.front().du[static_cast<size_t>(i)];
      const double gap_first_order =
          (stat.du[static_cast<size_t>(i)] - dy).norm() / dy.norm();
      const double gap_plain =
          (stat0.du[static_cast<size_t>(i)] - dy).norm() / dy.norm();
      // The plain variant must show the known sensitivity mismatch.
      if (gap_first_order > 1e-8 || gap_plain < 1e-2) return false;
    }
    return true;
  }});

  checks.push_back({"p2", "anchor identities on the synthetic record", [] {
    const TimeGrid grid{0.02, 1000, 0, 1000};
    Benchmark b = make_p2(synthetic_ground_motion(grid));
    const DynamicSolver dyn = b.dynamics();
    const DesignVector x{b.x0, b.lower, b.upper};
    const std::vector<WindowResponse> resp = dyn(b.x0, true);
    const EquivalentLoadSet fesl =
        compute_equivalent_loads(b.model, x, resp.front(), LoadVariant::Fesl);
    const WindowResponse stat = static_response(b.model, x, fesl, true);
    if ((stat.u - resp.front().u).norm() > 1e-8 * resp.front().u.norm())
      return false;
    for (int i = 0; i < 2; ++i) {
      const Eigen::MatrixXd& dy = resp.front().du[static_cast<size_t>(i)];
      if ((stat.du[static_cast<size_t>(i)] - dy).norm() > 1e-8 * dy.norm())
        return false;
    }
    return true;
  }});

  checks.push_back({"p2", "constraint count is 2002", [] {
    const TimeGrid grid{0.02, 1000, 0, 1000};
    Benchmark b = make_p2(synthetic_ground_motion(grid));
    const NlpEval eval = b.assembler(b.x0, b.dynamics()(b.x0, false), false);
    return eval.constraint_values.size() == 2002;
  }});

  checks.push_back({"p3", "constraint count is 52052", [] {
    Benchmark b = make_p3();
    const NlpEval eval = b.assembler(b.x0, b.dynamics()(b.x0, false), false);
    return eval.constraint_values.size() == 52052;
  }});

  bool all_ok = true;
  int ran = 0;
  for (const Check& c : checks) {
    if (!problem_filter.empty() && c.problem != problem_filter) continue;
    ++ran;
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      std::cout << "[fail] " << c.problem << ": " << c.name << " (" << e.what()
                << ")\n";
      all_ok = false;
      continue;
    }
    std::cout << (ok ? "[pass] " : "[fail] ") << c.problem << ": " << c.name
              << "\n";
    all_ok = all_ok && ok;
  }
  if (ran == 0) {
    std::cerr << "no checks match problem filter '" << problem_filter << "'\n";
    return kExitUsage;
  }
  return all_ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural dynamic-response optimization via equivalent static loads"};
  app.require_subcommand(1);

  std::string problem, method, x0_csv, record_path, out_dir = ".";
  double eps_value = 0.0;
  CLI::App* run = app.add_subcommand("run", "run one benchmark");
  run->add_option("--problem", problem, "benchmark id")
      ->required()
      ->check(CLI::IsMember({"p1", "p2", "p3"}));
  run->add_option("--method", method, "optimization path")
      ->required()
      ->check(CLI::IsMember({"direct", "esl", "fesl"}));
  run->add_option("--x0", x0_csv, "starting design, comma separated");
  CLI::Option* eps_opt = run->add_option("--eps", eps_value, "outer-loop stopping tolerance");
  run->add_option("--record", record_path, "ground motion CSV (p2)");
  run->add_option("--out", out_dir, "output directory");

  std::string verify_problem;
  CLI::App* verify = app.add_subcommand("verify", "run self checks");
  verify->add_option("--problem", verify_problem, "restrict checks to one benchmark")
      ->check(CLI::IsMember({"p1", "p2", "p3"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(run))
      return run_command(problem, method, x0_csv,
                         eps_opt->count() ? std::optional<double>(eps_value)
                                          : std::nullopt,
                         record_path, out_dir);
    return verify_command(verify_problem);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
