#pragma once

#include "feslkit/esl.hpp"
#include "feslkit/model.hpp"
#include "feslkit/nlp.hpp"
#include "feslkit/transient.hpp"

#include <functional>
#include <string>
#include <vector>

namespace feslkit {

/// A fully specified optimization benchmark: model, time grid, starting
/// point, solver settings, load construction and response assembly. The
/// dynamic and static pipelines both consume `assembler`, so the two
/// formulations of each benchmark share every response function.
struct Benchmark {
  std::string id;
  ModelDefinition model;
  TimeGrid grid;
  Eigen::VectorXd x0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double eps = 1e-6;
  int max_outer = 50;
  double move_limit = 0.0;  // outer-loop step cap, 0 = unlimited
  SqpOptions sqp;

  /// Nodal load history per load case at design x.
  std::function<std::vector<LoadHistory>(const DesignVector&)> load_cases;
  /// d(load)/dx_i for one case; null when the loads are design-independent.
  std::function<LoadHistory(const DesignVector&, int variable, int load_case)>
      load_sensitivity;

  ResponseAssembler assembler;

  /// Transient solve (plus direct sensitivities on request) packaged for the
  /// optimization drivers. Sensitivity integrations for different variables
  /// run on a worker pool capped by FESLKIT_THREADS.
  DynamicSolver dynamics() const;
};

/// Two-bar system: transient compliance objective, volume constraint.
Benchmark make_p1();

/// Two-story shear frame under ground acceleration: volume objective,
/// inter-story drift constraints. `record` holds one acceleration sample per
/// grid sample [m/s^2].
Benchmark make_p2(const Eigen::VectorXd& record);

/// 13-bar roof truss under two transient load cases: volume objective,
/// stress and buckling constraints.
Benchmark make_p3();

/// Deterministic stand-in ground motion for the shear frame when no measured
/// record is supplied: a three-tone sweep spanning the structure's natural
/// frequencies, ramped from zero.
Eigen::VectorXd synthetic_ground_motion(const TimeGrid& grid);

/// Worker-count policy: FESLKIT_THREADS if set and positive, otherwise the
/// hardware concurrency, never more than `jobs`.
int worker_count(int jobs);

}  // namespace feslkit
