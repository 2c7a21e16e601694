#include "feslkit/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace feslkit {

SensitivityHistory direct_sensitivity(const NewmarkIntegrator& integrator,
                                      const MatrixSensitivity& msens,
                                      const ResponseHistory& response,
                                      const LoadHistory& dload) {
  const int ndof = static_cast<int>(response.u.rows());
  const int nsamp = static_cast<int>(response.u.cols());
  if (dload.rows() != ndof || dload.cols() != nsamp)
    throw std::invalid_argument("load derivative dimensions mismatch");

  LoadHistory pseudo(ndof, nsamp);
  for (int k = 0; k < nsamp; ++k) {
    pseudo.col(k) = dload.col(k) - msens.dmass * response.a.col(k) -
                    msens.ddamping * response.v.col(k) -
                    msens.dstiffness * response.u.col(k);
  }
  const ResponseHistory r = integrator.integrate(pseudo);
  SensitivityHistory s;
  s.lambda = r.u;
  s.dlambda = r.v;
  s.ddlambda = r.a;
  s.variable_index = msens.variable_index;
  return s;
}

SensitivityHistory fd_response_gradient(
    const std::function<ResponseHistory(const Eigen::VectorXd&)>& solve_at,
    const DesignVector& x, int i, double h) {
  if (i < 0 || i >= x.size())
    throw std::out_of_range("variable index out of range");
  if (h <= 0.0) throw std::invalid_argument("FD step must be positive");

  const bool up_ok = x.values[i] + h <= x.upper[i];
  const bool down_ok = x.values[i] - h >= x.lower[i];
  if (!up_ok && !down_ok)
    throw std::invalid_argument("FD step exceeds bounds on both sides");

  SensitivityHistory s;
  s.variable_index = i;
  Eigen::VectorXd xp = x.values, xm = x.values;
  if (up_ok && down_ok) {
    xp[i] += h;
    xm[i] -= h;
    const ResponseHistory rp = solve_at(xp);
    const ResponseHistory rm = solve_at(xm);
    const double scale = 1.0 / (2.0 * h);
    s.lambda = scale * (rp.u - rm.u);
    s.dlambda = scale * (rp.v - rm.v);
    s.ddlambda = scale * (rp.a - rm.a);
  } else {
    // One-sided fallback at a bound, flagged for the caller.
    s.one_sided = true;
    if (up_ok)
      xp[i] += h;
    else
      xm[i] -= h;
    const ResponseHistory rp = solve_at(xp);
    const ResponseHistory rm = solve_at(xm);
    const double scale = 1.0 / h;
    s.lambda = scale * (rp.u - rm.u);
    s.dlambda = scale * (rp.v - rm.v);
    s.ddlambda = scale * (rp.a - rm.a);
  }
  return s;
}

RayleighSensitivity rayleigh_coefficient_sensitivity(
    const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiffness,
    const Eigen::MatrixXd& dmass, const Eigen::MatrixXd& dstiffness,
    const RayleighDamping& fit, double xi) {
  const double w1 = fit.omega[0], w2 = fit.omega[1];
  if (std::abs(w2 - w1) <= 1e-9 * std::max(w1, w2))
    throw std::runtime_error(
        "repeated natural frequencies: Rayleigh sensitivity undefined");

  RayleighSensitivity r;
  r.domega.resize(2);
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd phi = fit.mode_shapes.col(j);
    const double wj = fit.omega[j];
    r.domega[j] =
        phi.dot((dstiffness - wj * wj * dmass) * phi) / (2.0 * wj);
  }
  const double denom = (w1 + w2) * (w1 + w2);
  r.dalpha_m = xi * (2.0 * w2 * w2 / denom) * r.domega[0] +
               xi * (2.0 * w1 * w1 / denom) * r.domega[1];
  r.dalpha_k = -xi * (2.0 / denom) * (r.domega[0] + r.domega[1]);
  r.dC = r.dalpha_m * mass + fit.alpha_m * dmass + r.dalpha_k * stiffness +
         fit.alpha_k * dstiffness;
  return r;
}

}  // namespace feslkit
