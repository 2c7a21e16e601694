#pragma once

#include "feslkit/esl.hpp"
#include "feslkit/nlp.hpp"
#include "feslkit/transient.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace feslkit {

/// Outcome of one benchmark run, serializable to JSON. Doubles survive the
/// round trip bit-exactly (shortest-representation printing on write, exact
/// binary64 parse on read).
struct RunReport {
  std::string problem;
  std::string method;  // direct | esl | fesl
  Eigen::VectorXd x_final;
  double objective = 0.0;
  double max_constraint = 0.0;
  int n_transient_solves = 0;
  int outer_iterations = 0;  // 0 for the direct method
  bool converged = false;
  SolveStatus solver_status = SolveStatus::MaxIterations;
  KktReport kkt;  // computed with the dynamic-problem gradients
  double wall_time_s = 0.0;
  bool synthetic_record = false;  // p2 run without a measured record
  std::vector<OuterIterationRecord> history;
};

nlohmann::json to_json(const RunReport& report);
RunReport run_report_from_json(const nlohmann::json& j);

/// Read a two-column (time [s], acceleration [m/s^2]) CSV; a non-numeric
/// first line is treated as a header. The time column must be uniform and
/// match `grid.dt`; no resampling is attempted. The record must cover the
/// whole grid and is truncated to its length. Samples beyond 100 m/s^2 set
/// `*implausible` (wrong-units tell) without failing the load.
Eigen::VectorXd load_ground_motion(const std::string& path,
                                   const TimeGrid& grid,
                                   bool* implausible = nullptr);

/// Headered CSV with one row per sample; `columns` hold the data column-wise
/// and `names` labels them (names.size() == columns.cols()).
void write_csv(const std::string& path, const std::vector<std::string>& names,
               const Eigen::MatrixXd& columns);

/// One row per outer iteration: design, objective, violation, step norm.
void write_history_csv(const std::string& path,
                       const std::vector<OuterIterationRecord>& history);

}  // namespace feslkit
