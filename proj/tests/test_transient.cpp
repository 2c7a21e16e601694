#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "feslkit/transient.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

using namespace feslkit;

namespace {

constexpr double kPi = std::numbers::pi;

SystemMatrices sdof(double m, double c, double k) {
  SystemMatrices s;
  s.ndof = 1;
  s.mass = Eigen::MatrixXd::Constant(1, 1, m);
  s.damping = Eigen::MatrixXd::Constant(1, 1, c);
  s.stiffness = Eigen::MatrixXd::Constant(1, 1, k);
  return s;
}

// Undamped SDOF under p = sin(w t) from rest:
// u(t) = (sin(w t) - (w/wn) sin(wn t)) / (k - m w^2).
double sdof_exact(double m, double k, double w, double t) {
  const double wn = std::sqrt(k / m);
  return (std::sin(w * t) - (w / wn) * std::sin(wn * t)) / (k - m * w * w);
}

double rel_l2_error(double m, double k, double w, double dt, int n) {
  const SystemMatrices s = sdof(m, 0.0, k);
  TimeGrid grid{dt, n, 0, n};
  LoadHistory p(1, n + 1);
  for (int j = 0; j <= n; ++j) p(0, j) = std::sin(w * grid.time(j));
  const ResponseHistory r = newmark_solve(s, p, grid);
  double num = 0.0, den = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double e = sdof_exact(m, k, w, grid.time(j));
    num += (r.u(0, j) - e) * (r.u(0, j) - e);
    den += e * e;
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("SDOF response matches the closed-form solution") {
  // Natural period 1 s, forcing at half the natural frequency.
  const double m = 1.0, k = 4.0 * kPi * kPi, w = kPi;
  CHECK(rel_l2_error(m, k, w, 1.0 / 200.0, 800) < 1e-3);
}

TEST_CASE("integrator converges at second order") {
  const double m = 1.0, k = 4.0 * kPi * kPi, w = kPi;
  const double e1 = rel_l2_error(m, k, w, 1.0 / 100.0, 400);
  const double e2 = rel_l2_error(m, k, w, 1.0 / 200.0, 800);
  const double ratio = e1 / e2;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("zero load produces zero response") {
  const SystemMatrices s = sdof(2.0, 0.3, 5.0);
  TimeGrid grid{0.01, 100, 0, 100};
  const ResponseHistory r = newmark_solve(s, LoadHistory::Zero(1, 101), grid);
  CHECK(r.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("integration is linear in the load") {
  std::mt19937 rng(3);
  std::normal_distribution<double> dist;
  SystemMatrices s;
  s.ndof = 2;
  Eigen::Matrix2d A;
  A << 2, 0.3, 0.3, 1.5;
  s.mass = A;
  s.damping = 0.1 * A;
  Eigen::Matrix2d K;
  K << 6, -1, -1, 4;
  s.stiffness = K;
  TimeGrid grid{0.02, 150, 0, 150};
  LoadHistory p1(2, 151), p2(2, 151);
  for (int j = 0; j <= 150; ++j)
    for (int d = 0; d < 2; ++d) {
      p1(d, j) = dist(rng);
      p2(d, j) = dist(rng);
    }
  const NewmarkIntegrator integ(s, grid.dt);
  const ResponseHistory ra = integ.integrate(p1);
  const ResponseHistory rb = integ.integrate(p2);
  const ResponseHistory rc = integ.integrate(2.0 * p1 - 0.5 * p2);
  CHECK((rc.u - 2.0 * ra.u + 0.5 * rb.u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((rc.v - 2.0 * ra.v + 0.5 * rb.v).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((rc.a - 2.0 * ra.a + 0.5 * rb.a).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("every step satisfies the equation of motion") {
  SystemMatrices s;
  s.ndof = 2;
  Eigen::Matrix2d M, C, K;
  M << 3, 0.2, 0.2, 2;
  C << 0.4, 0.1, 0.1, 0.3;
  K << 9, -2, -2, 7;
  s.mass = M;
  s.damping = C;
  s.stiffness = K;
  TimeGrid grid{0.05, 200, 0, 200};
  std::mt19937 rng(11);
  std::normal_distribution<double> dist;
  LoadHistory p(2, 201);
  for (int j = 0; j <= 200; ++j)
    for (int d = 0; d < 2; ++d) p(d, j) = dist(rng);
  const ResponseHistory r = newmark_solve(s, p, grid);
  for (int j = 0; j <= 200; ++j) {
    const Eigen::Vector2d res = M * r.a.col(j) + C * r.v.col(j) +
                                K * r.u.col(j) - p.col(j);
    CHECK(res.cwiseAbs().maxCoeff() < 1e-9);
  }
  // Zero initial conditions.
  CHECK(r.u.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.v.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ground motion loads") {
  Eigen::Matrix2d M;
  M << 4, 0.5, 0.5, 3;
  TimeGrid grid{0.1, 5, 0, 5};
  Eigen::VectorXd rec(6);
  rec << 0.0, 1.0, -2.0, 0.5, 0.0, 3.0;
  const LoadHistory f = ground_motion_loads(M, rec, grid);
  REQUIRE(f.rows() == 2);
  REQUIRE(f.cols() == 6);
  const Eigen::Vector2d ones(1.0, 1.0);
  for (int j = 0; j <= 5; ++j)
    CHECK((f.col(j) + M * ones * rec[j]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("multi-sine waveform value and ramp") {
  MultiSineLoad w;
  w.a0 = 0.5;
  w.a = Eigen::Vector3d(1.0, 0.25, 0.0);
  w.freq_hz = Eigen::Vector3d(0.3, 1.1, 0.0);
  w.amplitude = 2.0;
  w.ramp_rate = 0.2;
  CHECK(w(0.0) == doctest::Approx(0.0));
  const double t = 1.7;
  const double expect = 2.0 *
                        (0.5 + std::sin(2 * kPi * 0.3 * t) +
                         0.25 * std::sin(2 * kPi * 1.1 * t)) *
                        (1.0 - std::exp(-0.2 * t));
  CHECK(w(t) == doctest::Approx(expect).epsilon(1e-14));

  TimeGrid grid{0.5, 4, 0, 4};
  const Eigen::VectorXd h = multi_sine_history(w, grid);
  REQUIRE(h.size() == 5);
  for (int j = 0; j <= 4; ++j)
    CHECK(h[j] == doctest::Approx(w(grid.time(j))).epsilon(1e-14));
}

TEST_CASE("truss load cases have the expected shape") {
  const ModelDefinition model = make_planar_truss_model();
  TimeGrid grid{0.02, 100, 50, 100};
  const auto cases = truss_load_cases(model, grid);
  REQUIRE(cases.size() == 2);
  for (const LoadHistory& p : cases) {
    CHECK(p.rows() == model.n_free_dofs());
    CHECK(p.cols() == grid.n_samples());
    CHECK(p.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(p.cwiseAbs().maxCoeff() > 0.0);
  }
  // The two cases are genuinely different loadings.
  CHECK((cases[0] - cases[1]).cwiseAbs().maxCoeff() > 0.0);
}
