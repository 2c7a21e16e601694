#include "feslkit/transient.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace feslkit {

namespace {
constexpr double kGamma = 0.5;
constexpr double kBeta = 0.25;
constexpr double kPi = std::numbers::pi;
}  // namespace

double MultiSineLoad::operator()(double t) const {
  double phi = a0;
  for (int i = 0; i < 3; ++i) phi += a[i] * std::sin(2.0 * kPi * freq_hz[i] * t);
  return amplitude * phi * (1.0 - std::exp(-ramp_rate * t));
}

NewmarkIntegrator::NewmarkIntegrator(const SystemMatrices& matrices, double dt)
    : mass_(matrices.mass),
      damping_(matrices.damping),
      stiffness_(matrices.stiffness),
      dt_(dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  mass_llt_.compute(mass_);
  if (mass_llt_.info() != Eigen::Success)
    throw std::runtime_error("mass matrix is not positive definite");
  const Eigen::MatrixXd keff = stiffness_ +
                               (kGamma / (kBeta * dt)) * damping_ +
                               (1.0 / (kBeta * dt * dt)) * mass_;
  effective_llt_.compute(keff);
  if (effective_llt_.info() != Eigen::Success)
    throw std::runtime_error("singular Newmark effective stiffness");
}

ResponseHistory NewmarkIntegrator::integrate(const LoadHistory& loads) const {
  const int ndof = static_cast<int>(mass_.rows());
  const int nsteps = static_cast<int>(loads.cols()) - 1;
  if (loads.rows() != ndof || nsteps < 0)
    throw std::invalid_argument("load history dimensions mismatch");

  ResponseHistory r;
  r.u = Eigen::MatrixXd::Zero(ndof, nsteps + 1);
  r.v = Eigen::MatrixXd::Zero(ndof, nsteps + 1);
  r.a = Eigen::MatrixXd::Zero(ndof, nsteps + 1);

  // Initial acceleration from equilibrium at t=0 with zero u0, v0.
  r.a.col(0) = mass_llt_.solve(loads.col(0));

  const double c0 = 1.0 / (kBeta * dt_ * dt_);
  const double c1 = 1.0 / (kBeta * dt_);
  const double c2 = 1.0 / (2.0 * kBeta) - 1.0;
  const double c3 = kGamma / (kBeta * dt_);
  const double c4 = kGamma / kBeta - 1.0;
  const double c5 = dt_ * (kGamma / (2.0 * kBeta) - 1.0);

  for (int k = 0; k < nsteps; ++k) {
    const auto uk = r.u.col(k);
    const auto vk = r.v.col(k);
    const auto ak = r.a.col(k);
    const Eigen::VectorXd rhs =
        loads.col(k + 1) + mass_ * (c0 * uk + c1 * vk + c2 * ak) +
        damping_ * (c3 * uk + c4 * vk + c5 * ak);
    const Eigen::VectorXd un = effective_llt_.solve(rhs);
    const Eigen::VectorXd an = c0 * (un - uk) - c1 * vk - c2 * ak;
    const Eigen::VectorXd vn = vk + dt_ * ((1.0 - kGamma) * ak + kGamma * an);
    r.u.col(k + 1) = un;
    r.v.col(k + 1) = vn;
    r.a.col(k + 1) = an;
  }
  return r;
}

ResponseHistory newmark_solve(const SystemMatrices& matrices,
                              const LoadHistory& loads, const TimeGrid& grid) {
  if (!grid.valid()) throw std::invalid_argument("invalid time grid");
  if (loads.cols() != grid.n_samples())
    throw std::invalid_argument("load history does not match time grid");
  return NewmarkIntegrator(matrices, grid.dt).integrate(loads);
}

LoadHistory ground_motion_loads(const Eigen::MatrixXd& mass,
                                const Eigen::VectorXd& record,
                                const TimeGrid& grid) {
  if (record.size() < grid.n_samples())
    throw std::invalid_argument("ground-motion record shorter than time grid");
  const Eigen::VectorXd me = mass * Eigen::VectorXd::Ones(mass.rows());
  LoadHistory loads(mass.rows(), grid.n_samples());
  for (int k = 0; k < grid.n_samples(); ++k) loads.col(k) = -me * record[k];
  return loads;
}

Eigen::VectorXd multi_sine_history(const MultiSineLoad& load,
                                   const TimeGrid& grid) {
  Eigen::VectorXd s(grid.n_samples());
  for (int k = 0; k < grid.n_samples(); ++k) s[k] = load(grid.time(k));
  return s;
}

MultiSineLoad truss_load_case_waveform(int load_case) {
  MultiSineLoad w;
  w.amplitude = 25e5;
  w.ramp_rate = 0.2;
  if (load_case == 1) {
    w.a0 = 0.75;
    w.a = Eigen::Vector3d(0.10, 0.05, 0.10);
    w.freq_hz = Eigen::Vector3d(6.0, 1.2, 0.06);
  } else if (load_case == 2) {
    w.a0 = 0.80;
    w.a = Eigen::Vector3d(0.05, 0.10, 0.05);
    w.freq_hz = Eigen::Vector3d(2.4, 1.8, 0.03);
  } else {
    throw std::invalid_argument("load case must be 1 or 2");
  }
  return w;
}

std::vector<LoadHistory> truss_load_cases(const ModelDefinition& model,
                                          const TimeGrid& grid) {
  if (model.kind != ModelKind::PlanarTruss)
    throw std::invalid_argument("truss load cases need a planar truss model");
  const int ndof = model.n_free_dofs();

  // Roof slope 1:2 on both sides. Pressure pushes the
  // left-slope nodes inward, suction pulls the right-slope nodes outward;
  // both unit vectors have a positive x component.
  const double theta = std::atan2(1.0, 2.0);
  const Eigen::Vector2d press(std::sin(theta), -std::cos(theta));
  const Eigen::Vector2d suck(std::sin(theta), std::cos(theta));

  Eigen::VectorXd pattern = Eigen::VectorXd::Zero(ndof);
  auto add = [&](int node, const Eigen::Vector2d& dir) {
    for (int c = 0; c < 2; ++c) {
      const int dof = model.free_dof(node, c);
      if (dof >= 0) pattern[dof] += dir[c];
    }
  };
  add(5, press);  // node 6
  add(7, press);  // node 8
  add(9, press);  // node 10, left slope
  add(6, suck);   // node 7
  add(8, suck);   // node 9
  add(9, suck);   // node 10, right slope

  std::vector<LoadHistory> cases;
  for (int l = 1; l <= 2; ++l) {
    const Eigen::VectorXd wave =
        multi_sine_history(truss_load_case_waveform(l), grid);
    LoadHistory h(ndof, grid.n_samples());
    for (int k = 0; k < grid.n_samples(); ++k) h.col(k) = pattern * wave[k];
    cases.push_back(std::move(h));
  }
  return cases;
}

}  // namespace feslkit
