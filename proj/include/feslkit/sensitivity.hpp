#pragma once

#include <functional>

#include "feslkit/transient.hpp"

namespace feslkit {

/// Trajectory of the response derivative w.r.t. one design variable:
/// lambda_k = du_k/dx_i, plus velocity and acceleration derivatives.
struct SensitivityHistory {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd dlambda;
  Eigen::MatrixXd ddlambda;
  int variable_index = -1;
  bool one_sided = false;  // set when an FD oracle had to fall back
};

/// Direct differentiation of the equations of motion: forms the pseudo load
/// -dM a - dC v - dK u + dp and integrates it with the same Newmark operator
/// (and factorization) as the primal solve.
SensitivityHistory direct_sensitivity(const NewmarkIntegrator& integrator,
                                      const MatrixSensitivity& msens,
                                      const ResponseHistory& response,
                                      const LoadHistory& dload);

/// Central finite differences of a full transient solve; the verification
/// oracle for direct_sensitivity. `solve_at` must return the response at an
/// arbitrary in-bounds design.
SensitivityHistory fd_response_gradient(
    const std::function<ResponseHistory(const Eigen::VectorXd&)>& solve_at,
    const DesignVector& x, int i, double h);

struct RayleighSensitivity {
  double dalpha_m = 0.0;
  double dalpha_k = 0.0;
  Eigen::VectorXd domega;
  Eigen::MatrixXd dC;
};

/// Derivatives of the Rayleigh damping fit through the first two natural
/// frequencies; requires mass-normalized mode shapes and distinct
/// frequencies.
RayleighSensitivity rayleigh_coefficient_sensitivity(
    const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiffness,
    const Eigen::MatrixXd& dmass, const Eigen::MatrixXd& dstiffness,
    const RayleighDamping& fit, double xi);

}  // namespace feslkit
