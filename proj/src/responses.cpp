#include "feslkit/responses.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace feslkit {

namespace {
constexpr double kPi = std::numbers::pi;

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace

void ConstraintBundle::append(const ConstraintBundle& other) {
  if (size() == 0) {
    *this = other;
    return;
  }
  const int n = static_cast<int>(jacobian.cols());
  Eigen::VectorXd v(size() + other.size());
  v << values, other.values;
  Eigen::MatrixXd j(size() + other.size(), n);
  j << jacobian, other.jacobian;
  values = std::move(v);
  jacobian = std::move(j);
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

ObjectiveEval compliance(double stiffness, const Eigen::VectorXd& dstiffness,
                         const WindowResponse& resp, double dt) {
  if (resp.u.rows() != 1)
    throw std::invalid_argument("compliance expects a single-DOF response");
  if (resp.u.cols() == 0) throw std::invalid_argument("empty window");
  const int n = static_cast<int>(dstiffness.size());
  ObjectiveEval out;
  out.gradient = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < resp.u.cols(); ++k) {
    const double u = resp.u(0, k);
    out.value += dt * stiffness * u * u;
    for (int i = 0; i < n; ++i)
      out.gradient[i] +=
          dt * (dstiffness[i] * u * u + 2.0 * stiffness * u * resp.du[i](0, k));
  }
  return out;
}

ConstraintBundle drift_constraints(const WindowResponse& resp, double d_max) {
  if (resp.u.rows() != 2)
    throw std::invalid_argument("drift constraints expect two stories");
  if (d_max <= 0.0) throw std::invalid_argument("d_max must be positive");
  const int nwin = static_cast<int>(resp.u.cols());
  const int n = static_cast<int>(resp.du.size());

  Eigen::Matrix2d D;
  D << 1, 0, -1, 1;

  ConstraintBundle b;
  b.values.resize(2 * nwin);
  b.jacobian.resize(2 * nwin, n);
  b.labels.reserve(2 * nwin);
  for (int k = 0; k < nwin; ++k) {
    const Eigen::Vector2d d = D * resp.u.col(k);
    for (int story = 0; story < 2; ++story) {
      const int row = 2 * k + story;
      b.values[row] = std::abs(d[story]) / d_max - 1.0;
      const double s = sign_or_zero(d[story]);
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d dd = D * resp.du[i].col(k);
        b.jacobian(row, i) = s * dd[story] / d_max;
      }
      b.labels.push_back({ConstraintLabel::Kind::Drift, story, k, 0});
    }
  }
  return b;
}

StressState axial_stress(const ModelDefinition& model, const DesignVector& x,
                         const WindowResponse& resp) {
  if (model.kind != ModelKind::PlanarTruss)
    throw std::invalid_argument("axial stress is defined for the truss model");
  const int nbars = model.n_elements();
  const int nwin = static_cast<int>(resp.u.cols());
  const int n = static_cast<int>(resp.du.size());

  StressState s;
  s.sigma.resize(nbars, nwin);
  s.dsigma.assign(n, Eigen::MatrixXd::Zero(nbars, nwin));
  s.sigma_buck.resize(nbars);
  s.dsigma_buck = Eigen::MatrixXd::Zero(nbars, x.size());

  const Eigen::VectorXd diam = model.linking.apply(x.values);

  // Translational displacement of a node at window step k (zero if fixed).
  auto node_disp = [&](const Eigen::MatrixXd& field, int node, int k) {
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    for (int c = 0; c < 2; ++c) {
      const int dof = model.free_dof(node, c);
      if (dof >= 0) u[c] = field(dof, k);
    }
    return u;
  };

  for (int b = 0; b < nbars; ++b) {
    const int n0 = model.elements(b, 0);
    const int n1 = model.elements(b, 1);
    const double E = model.youngs_modulus[b];
    const double L0 = model.element_length(b);
    if (L0 <= 0.0) throw std::runtime_error("degenerate bar geometry");

    s.sigma_buck[b] = kPi * kPi * E * diam[b] * diam[b] / (16.0 * L0 * L0);
    const int group = model.linking.group_of(b);
    s.dsigma_buck(b, group) = kPi * kPi * E * diam[b] / (8.0 * L0 * L0);

    const Eigen::Vector2d x0 = model.nodes.row(n0);
    const Eigen::Vector2d x1 = model.nodes.row(n1);
    for (int k = 0; k < nwin; ++k) {
      const Eigen::Vector2d delta = (x1 + node_disp(resp.u, n1, k)) -
                                    (x0 + node_disp(resp.u, n0, k));
      const double Lk = delta.norm();
      if (Lk <= 1e-12) throw std::runtime_error("bar collapsed to zero length");
      s.sigma(b, k) = E * (Lk - L0) / L0;
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d ddelta = node_disp(resp.du[i], n1, k) -
                                       node_disp(resp.du[i], n0, k);
        s.dsigma[i](b, k) = E / L0 * delta.dot(ddelta) / Lk;
      }
    }
  }
  return s;
}

ConstraintBundle stress_constraints(const StressState& state, double sigma_max,
                                    int load_case) {
  const int nbars = static_cast<int>(state.sigma.rows());
  const int nwin = static_cast<int>(state.sigma.cols());
  const int n = static_cast<int>(state.dsigma.size());

  ConstraintBundle b;
  b.values.resize(nbars * nwin);
  b.jacobian.resize(nbars * nwin, n);
  b.labels.reserve(nbars * nwin);
  for (int bar = 0; bar < nbars; ++bar) {
    for (int k = 0; k < nwin; ++k) {
      const int row = bar * nwin + k;
      const double sg = state.sigma(bar, k);
      b.values[row] = std::abs(sg) / sigma_max - 1.0;
      const double s = sign_or_zero(sg);
      for (int i = 0; i < n; ++i)
        b.jacobian(row, i) = s * state.dsigma[i](bar, k) / sigma_max;
      b.labels.push_back({ConstraintLabel::Kind::Stress, bar, k, load_case});
    }
  }
  return b;
}

ConstraintBundle buckling_constraints(const StressState& state,
                                      int load_case) {
  const int nbars = static_cast<int>(state.sigma.rows());
  const int nwin = static_cast<int>(state.sigma.cols());
  const int n = static_cast<int>(state.dsigma.size());

  ConstraintBundle b;
  b.values.resize(nbars * nwin);
  b.jacobian.resize(nbars * nwin, n);
  b.labels.reserve(nbars * nwin);
  for (int bar = 0; bar < nbars; ++bar) {
    const double sb = state.sigma_buck[bar];
    for (int k = 0; k < nwin; ++k) {
      const int row = bar * nwin + k;
      const double sg = state.sigma(bar, k);
      b.values[row] = -1.0 - sg / sb;
      for (int i = 0; i < n; ++i)
        b.jacobian(row, i) =
            (sg * state.dsigma_buck(bar, i) - state.dsigma[i](bar, k) * sb) /
            (sb * sb);
      b.labels.push_back({ConstraintLabel::Kind::Buckling, bar, k, load_case});
    }
  }
  return b;
}

}  // namespace feslkit
