#pragma once

#include <Eigen/Dense>

#include "feslkit/model.hpp"

namespace feslkit {

/// Uniform time discretization. Step indices run 0..n_steps; the objective
/// and constraint window is [window_start, window_end] inclusive.
struct TimeGrid {
  double dt = 0.0;
  int n_steps = 0;
  int window_start = 0;
  int window_end = 0;

  int n_samples() const { return n_steps + 1; }
  int n_window() const { return window_end - window_start + 1; }
  double time(int k) const { return dt * k; }
  bool valid() const {
    return dt > 0.0 && 0 <= window_start && window_start <= window_end &&
           window_end <= n_steps;
  }
};

/// Nodal force vector per time step: column k is the load at t_k [N].
using LoadHistory = Eigen::MatrixXd;

/// Displacement/velocity/acceleration trajectories from zero initial
/// conditions, one column per step.
struct ResponseHistory {
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  Eigen::MatrixXd a;
};

/// Multi-sine nodal load waveform with an exponential start-up ramp:
/// p(t) = amplitude * (a0 + sum a_i sin(2 pi f_i t)) * (1 - exp(-ramp_rate t)).
struct MultiSineLoad {
  double a0 = 0.0;
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  Eigen::Vector3d freq_hz = Eigen::Vector3d::Zero();
  double amplitude = 0.0;
  double ramp_rate = 0.2;

  double operator()(double t) const;
};

/// Average-acceleration Newmark integrator (gamma = 1/2, beta = 1/4). The
/// effective stiffness is factorized once at construction and reused for
/// every step and every right-hand-side history, so the primal response and
/// all per-variable sensitivity integrations share one factorization.
class NewmarkIntegrator {
 public:
  NewmarkIntegrator(const SystemMatrices& matrices, double dt);

  ResponseHistory integrate(const LoadHistory& loads) const;

  double dt() const { return dt_; }

 private:
  const Eigen::MatrixXd mass_;
  const Eigen::MatrixXd damping_;
  const Eigen::MatrixXd stiffness_;
  double dt_;
  Eigen::LLT<Eigen::MatrixXd> mass_llt_;
  Eigen::LLT<Eigen::MatrixXd> effective_llt_;
};

ResponseHistory newmark_solve(const SystemMatrices& matrices,
                              const LoadHistory& loads, const TimeGrid& grid);

/// Seismic nodal loads f_k = -M e a_g(t_k) with unit influence vector.
LoadHistory ground_motion_loads(const Eigen::MatrixXd& mass,
                                const Eigen::VectorXd& record,
                                const TimeGrid& grid);

Eigen::VectorXd multi_sine_history(const MultiSineLoad& load,
                                   const TimeGrid& grid);

/// Benchmark waveforms: roof pressure/suction load cases 1 and 2.
MultiSineLoad truss_load_case_waveform(int load_case);

/// Nodal load histories for the two roof load cases of the truss benchmark.
/// The left slope nodes are pushed inward and the right slope nodes pulled
/// outward, perpendicular to the roof; the apex sees both contributions.
std::vector<LoadHistory> truss_load_cases(const ModelDefinition& model,
                                          const TimeGrid& grid);

}  // namespace feslkit
