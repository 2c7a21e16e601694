#include "feslkit/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace feslkit {
namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

SolveStatus status_from_string(const std::string& s) {
  if (s == "converged") return SolveStatus::Converged;
  if (s == "max_iterations") return SolveStatus::MaxIterations;
  if (s == "infeasible") return SolveStatus::Infeasible;
  if (s == "line_search_failure") return SolveStatus::LineSearchFailure;
  throw std::invalid_argument("unknown solver status: " + s);
}

}  // namespace

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["problem"] = r.problem;
  j["method"] = r.method;
  j["x_final"] = vector_to_json(r.x_final);
  j["objective"] = r.objective;
  j["max_constraint"] = r.max_constraint;
  j["n_transient_solves"] = r.n_transient_solves;
  j["outer_iterations"] = r.outer_iterations;
  j["converged"] = r.converged;
  j["solver_status"] = to_string(r.solver_status);
  j["kkt"] = {{"stationarity_norm", r.kkt.stationarity_norm},
              {"max_violation", r.kkt.max_violation},
              {"min_multiplier", r.kkt.min_multiplier},
              {"complementarity_norm", r.kkt.complementarity_norm}};
  j["wall_time_s"] = r.wall_time_s;
  j["synthetic_record"] = r.synthetic_record;
  nlohmann::json hist = nlohmann::json::array();
  for (const OuterIterationRecord& rec : r.history) {
    hist.push_back({{"x", vector_to_json(rec.x)},
                    {"objective", rec.objective},
                    {"max_violation", rec.max_violation},
                    {"step_norm", rec.step_norm},
                    {"inner_status", to_string(rec.inner_status)},
                    {"inner_iterations", rec.inner_iterations}});
  }
  j["history"] = hist;
  return j;
}

RunReport run_report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.problem = j.at("problem").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.x_final = vector_from_json(j.at("x_final"));
  r.objective = j.at("objective").get<double>();
  r.max_constraint = j.at("max_constraint").get<double>();
  r.n_transient_solves = j.at("n_transient_solves").get<int>();
  r.outer_iterations = j.at("outer_iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.solver_status = status_from_string(j.at("solver_status").get<std::string>());
  const nlohmann::json& k = j.at("kkt");
  r.kkt.stationarity_norm = k.at("stationarity_norm").get<double>();
  r.kkt.max_violation = k.at("max_violation").get<double>();
  r.kkt.min_multiplier = k.at("min_multiplier").get<double>();
  r.kkt.complementarity_norm = k.at("complementarity_norm").get<double>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.synthetic_record = j.at("synthetic_record").get<bool>();
  for (const nlohmann::json& h : j.at("history")) {
    OuterIterationRecord rec;
    rec.x = vector_from_json(h.at("x"));
    rec.objective = h.at("objective").get<double>();
    rec.max_violation = h.at("max_violation").get<double>();
    rec.step_norm = h.at("step_norm").get<double>();
    rec.inner_status = status_from_string(h.at("inner_status").get<std::string>());
    rec.inner_iterations = h.at("inner_iterations").get<int>();
    r.history.push_back(std::move(rec));
  }
  return r;
}

Eigen::VectorXd load_ground_motion(const std::string& path,
                                   const TimeGrid& grid, bool* implausible) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ground motion file: " + path);

  std::vector<double> times;
  std::vector<double> accels;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::stringstream ss(line);
    std::string t_str, a_str;
    if (!std::getline(ss, t_str, ',') || !std::getline(ss, a_str))
      throw std::runtime_error("ground motion file needs two comma-separated columns: " + path);
    try {
      const double t = std::stod(t_str);
      const double a = std::stod(a_str);
      times.push_back(t);
      accels.push_back(a);
    } catch (const std::exception&) {
      if (first) {
        first = false;  // header line
        continue;
      }
      throw std::runtime_error("non-numeric ground motion data in " + path +
                               ": " + line);
    }
    first = false;
  }
  if (times.empty())
    throw std::runtime_error("ground motion file is empty: " + path);
  if (static_cast<int>(times.size()) < grid.n_samples())
    throw std::runtime_error("ground motion record is shorter than the analysis grid: " + path);

  for (size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (std::abs(dt - grid.dt) > 1e-9 * std::max(1.0, grid.dt))
      throw std::runtime_error(
          "ground motion time step does not match the analysis grid (no resampling): " + path);
  }

  Eigen::VectorXd record(grid.n_samples());
  bool big = false;
  for (int k = 0; k < grid.n_samples(); ++k) {
    record[k] = accels[static_cast<size_t>(k)];
    if (std::abs(record[k]) > 100.0) big = true;
  }
  if (implausible) *implausible = big;
  return record;
}

void write_csv(const std::string& path, const std::vector<std::string>& names,
               const Eigen::MatrixXd& columns) {
  if (static_cast<Eigen::Index>(names.size()) != columns.cols())
    throw std::invalid_argument("csv column name count mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out.precision(17);
  for (size_t i = 0; i < names.size(); ++i)
    out << names[i] << (i + 1 < names.size() ? "," : "\n");
  for (Eigen::Index r = 0; r < columns.rows(); ++r)
    for (Eigen::Index c = 0; c < columns.cols(); ++c)
      out << columns(r, c) << (c + 1 < columns.cols() ? "," : "\n");
}

void write_history_csv(const std::string& path,
                       const std::vector<OuterIterationRecord>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out.precision(17);
  const int n = history.empty() ? 0 : static_cast<int>(history.front().x.size());
  out << "iteration";
  for (int i = 0; i < n; ++i) out << ",x" << i + 1;
  out << ",objective,max_violation,step_norm,inner_iterations,inner_status\n";
  for (size_t it = 0; it < history.size(); ++it) {
    const OuterIterationRecord& r = history[it];
    out << it + 1;
    for (int i = 0; i < n; ++i) out << "," << r.x[i];
    out << "," << r.objective << "," << r.max_violation << "," << r.step_norm
        << "," << r.inner_iterations << "," << to_string(r.inner_status) << "\n";
  }
}

}  // namespace feslkit
