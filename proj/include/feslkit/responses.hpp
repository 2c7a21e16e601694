#pragma once

#include <vector>

#include "feslkit/model.hpp"

namespace feslkit {

/// Displacements over the evaluation window plus their per-variable
/// derivatives, one column per window step. Shared by the dynamic pipeline
/// (Newmark + direct sensitivity) and the static sub-problem pipeline.
struct WindowResponse {
  Eigen::MatrixXd u;                  // ndof x n_window
  std::vector<Eigen::MatrixXd> du;    // n_variables entries, ndof x n_window
};

struct ConstraintLabel {
  enum class Kind { Volume, Drift, Stress, Buckling };
  Kind kind = Kind::Volume;
  int element = 0;    // bar or story index
  int step = 0;       // window-step index
  int load_case = 0;
};

/// Inequality constraints (feasible iff <= 0) with analytic jacobian.
struct ConstraintBundle {
  Eigen::VectorXd values;
  Eigen::MatrixXd jacobian;  // n_constraints x n_variables
  std::vector<ConstraintLabel> labels;

  int size() const { return static_cast<int>(values.size()); }
  void append(const ConstraintBundle& other);
};

struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Transient compliance dt * sum_k k(x) u_k^2 over the window, with the
/// chain-rule gradient dk u^2 + 2 k u du.
ObjectiveEval compliance(double stiffness, const Eigen::VectorXd& dstiffness,
                         const WindowResponse& resp, double dt);

/// Inter-story drift constraints |d_i|/d_max - 1 for the two-story frame,
/// d = D u with D = [[1,0],[-1,1]]. sign(0) is taken as 0 in the jacobian.
ConstraintBundle drift_constraints(const WindowResponse& resp, double d_max);

/// Axial stress per bar per window step from the geometrically exact length
/// change, plus the Euler buckling stress limits and all design derivatives.
struct StressState {
  Eigen::MatrixXd sigma;                // n_bars x n_window [Pa]
  std::vector<Eigen::MatrixXd> dsigma;  // per variable
  Eigen::VectorXd sigma_buck;           // n_bars [Pa]
  Eigen::MatrixXd dsigma_buck;          // n_bars x n_variables
};

StressState axial_stress(const ModelDefinition& model, const DesignVector& x,
                         const WindowResponse& resp);

ConstraintBundle stress_constraints(const StressState& state, double sigma_max,
                                    int load_case);

/// Compression-side buckling constraints q = -1 - sigma/sigma_buck <= 0.
ConstraintBundle buckling_constraints(const StressState& state, int load_case);

}  // namespace feslkit
