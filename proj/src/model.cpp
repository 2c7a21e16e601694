#include "feslkit/model.hpp"

#include "feslkit/sensitivity.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace feslkit {

namespace {

constexpr double kPi = std::numbers::pi;

std::string design_to_string(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

void check_design(const ModelDefinition& model, const DesignVector& x) {
  if (x.size() != model.n_variables())
    throw std::invalid_argument("design vector size does not match model");
  if (!x.in_bounds(1e-12))
    throw std::invalid_argument("design out of bounds: " +
                                design_to_string(x.values));
}

/// 6x6 Euler-Bernoulli beam stiffness in local axes. Linear in (A, I), so the
/// same builder evaluated at (dA/dD, dI/dD) yields the design derivative.
Eigen::Matrix<double, 6, 6> beam_stiffness_local(double E, double l, double A,
                                                 double I) {
  Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
  const double ka = E * A / l;
  const double kb = 12.0 * E * I / (l * l * l);
  const double kc = 6.0 * E * I / (l * l);
  const double kd = 4.0 * E * I / l;
  const double ke = 2.0 * E * I / l;
  k(0, 0) = ka;  k(0, 3) = -ka;
  k(3, 0) = -ka; k(3, 3) = ka;
  k(1, 1) = kb;  k(1, 2) = kc;  k(1, 4) = -kb; k(1, 5) = kc;
  k(2, 1) = kc;  k(2, 2) = kd;  k(2, 4) = -kc; k(2, 5) = ke;
  k(4, 1) = -kb; k(4, 2) = -kc; k(4, 4) = kb;  k(4, 5) = -kc;
  k(5, 1) = kc;  k(5, 2) = ke;  k(5, 4) = -kc; k(5, 5) = kd;
  return k;
}

/// Consistent 6x6 beam mass matrix in local axes, linear in A.
Eigen::Matrix<double, 6, 6> beam_mass_local(double rho, double l, double A) {
  Eigen::Matrix<double, 6, 6> m;
  const double c = rho * A * l / 420.0;
  const double l2 = l * l;
  m << 140, 0, 0, 70, 0, 0,
       0, 156, 22 * l, 0, 54, -13 * l,
       0, 22 * l, 4 * l2, 0, 13 * l, -3 * l2,
       70, 0, 0, 140, 0, 0,
       0, 54, 13 * l, 0, 156, -22 * l,
       0, -13 * l, -3 * l2, 0, -22 * l, 4 * l2;
  return c * m;
}

Eigen::Matrix<double, 6, 6> beam_rotation(double c, double s) {
  Eigen::Matrix<double, 6, 6> t = Eigen::Matrix<double, 6, 6>::Zero();
  for (int b = 0; b < 2; ++b) {
    const int o = 3 * b;
    t(o + 0, o + 0) = c;  t(o + 0, o + 1) = s;
    t(o + 1, o + 0) = -s; t(o + 1, o + 1) = c;
    t(o + 2, o + 2) = 1.0;
  }
  return t;
}

double shear_column_stiffness(double E, double L, double d) {
  const double I = kPi * d * d * d * d / 64.0;
  return 3.0 * E * I / (L * L * L);
}

double shear_column_stiffness_derivative(double E, double L, double d) {
  const double dI = kPi * d * d * d / 16.0;
  return 3.0 * E * dI / (L * L * L);
}

struct TrussMatrices {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;
};

/// Assembles the truss free-DOF mass/stiffness. When `derivative_of >= 0`
/// only the elements linked to that variable contribute, evaluated at the
/// section derivatives (chain rule through D = L x).
TrussMatrices assemble_truss(const ModelDefinition& model,
                             const Eigen::VectorXd& diameters,
                             int derivative_of = -1) {
  const int nfree = model.n_free_dofs();
  TrussMatrices out;
  out.mass = Eigen::MatrixXd::Zero(nfree, nfree);
  out.stiffness = Eigen::MatrixXd::Zero(nfree, nfree);

  for (int e = 0; e < model.n_elements(); ++e) {
    if (derivative_of >= 0 && model.linking.group_of(e) != derivative_of)
      continue;
    const int n0 = model.elements(e, 0);
    const int n1 = model.elements(e, 1);
    const Eigen::Vector2d delta = model.nodes.row(n1) - model.nodes.row(n0);
    const double l = delta.norm();
    const double d = diameters[e];
    double A = kPi * d * d / 4.0;
    double I = kPi * d * d * d * d / 64.0;
    if (derivative_of >= 0) {
      A = kPi * d / 2.0;
      I = kPi * d * d * d / 16.0;
    }
    const auto t = beam_rotation(delta.x() / l, delta.y() / l);
    const Eigen::Matrix<double, 6, 6> ke =
        t.transpose() *
        beam_stiffness_local(model.youngs_modulus[e], l, A, I) * t;
    const Eigen::Matrix<double, 6, 6> me =
        t.transpose() * beam_mass_local(model.density[e], l, A) * t;

    int dof[6];
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 3; ++c)
        dof[3 * a + c] = model.free_dof(model.elements(e, a), c);
    for (int r = 0; r < 6; ++r) {
      if (dof[r] < 0) continue;
      for (int c = 0; c < 6; ++c) {
        if (dof[c] < 0) continue;
        out.stiffness(dof[r], dof[c]) += ke(r, c);
        out.mass(dof[r], dof[c]) += me(r, c);
      }
    }
  }
  return out;
}

}  // namespace

bool DesignVector::in_bounds(double tol) const {
  for (int i = 0; i < size(); ++i)
    if (values[i] < lower[i] - tol || values[i] > upper[i] + tol) return false;
  return true;
}

LinkingMap LinkingMap::identity(int n) {
  return {Eigen::MatrixXd::Identity(n, n)};
}

int LinkingMap::group_of(int element) const {
  for (int j = 0; j < L.cols(); ++j)
    if (L(element, j) != 0.0) return j;
  throw std::logic_error("element has no size group");
}

int ModelDefinition::n_free_dofs() const {
  switch (kind) {
    case ModelKind::TwoBar: return 1;
    case ModelKind::ShearFrame: return 2;
    case ModelKind::PlanarTruss:
      return 3 * (static_cast<int>(nodes.rows()) -
                  static_cast<int>(fixed_nodes.size()));
  }
  return 0;
}

double ModelDefinition::element_length(int e) const {
  const Eigen::Vector2d d = nodes.row(elements(e, 1)) - nodes.row(elements(e, 0));
  return d.norm();
}

int ModelDefinition::free_dof(int node, int comp) const {
  for (int f : fixed_nodes)
    if (f == node) return -1;
  int idx = 0;
  for (int n = 0; n < node; ++n) {
    bool fixed = false;
    for (int f : fixed_nodes) fixed = fixed || (f == n);
    if (!fixed) ++idx;
  }
  return 3 * idx + comp;
}

ModelDefinition make_two_bar_model() {
  ModelDefinition m;
  m.kind = ModelKind::TwoBar;
  m.nodes.resize(3, 2);
  m.nodes << 0.0, 0.0, 0.0, 1.0, 0.0, 2.5;  // clamped ends, hinge between
  m.elements.resize(2, 2);
  m.elements << 0, 1, 1, 2;
  m.youngs_modulus = Eigen::Vector2d(1.0, 1.0);
  m.density = Eigen::Vector2d(1.0, 1.0);
  m.linking = LinkingMap::identity(2);
  m.damping = {DampingKind::Constant, 0.1, 0.0};
  return m;
}

ModelDefinition make_shear_frame_model() {
  ModelDefinition m;
  m.kind = ModelKind::ShearFrame;
  m.nodes.resize(3, 2);
  m.nodes << 0.0, 0.0, 0.0, 3.5, 0.0, 7.0;
  m.elements.resize(2, 2);
  m.elements << 0, 1, 1, 2;
  m.youngs_modulus = Eigen::Vector2d(200e9, 200e9);
  m.density = Eigen::Vector2d(7850.0, 7850.0);
  m.linking = LinkingMap::identity(2);
  m.damping = {DampingKind::Rayleigh, 0.0, 0.05};
  return m;
}

ModelDefinition make_planar_truss_model() {
  ModelDefinition m;
  m.kind = ModelKind::PlanarTruss;
  m.nodes.resize(10, 2);
  m.nodes << -6, 0, -3, 0, 0, 0, 3, 0, 6, 0,
             -4, 1, 4, 1, -2, 2, 2, 2, 0, 3;
  m.elements.resize(13, 2);
  m.elements << 0, 5,   // 1: 1-6
                5, 1,   // 2: 6-2
                3, 6,   // 3: 4-7
                4, 6,   // 4: 5-7
                5, 7,   // 5: 6-8
                1, 7,   // 6: 2-8
                2, 7,   // 7: 3-8
                2, 8,   // 8: 3-9
                3, 8,   // 9: 4-9
                6, 8,   // 10: 7-9
                7, 9,   // 11: 8-10
                2, 9,   // 12: 3-10
                8, 9;   // 13: 9-10
  m.youngs_modulus = Eigen::VectorXd::Constant(13, 200e9);
  m.density = Eigen::VectorXd::Constant(13, 7850.0);
  m.fixed_nodes = {0, 1, 2, 3, 4};
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(13, 7);
  const int group[13] = {0, 1, 1, 0, 2, 3, 4, 4, 3, 2, 5, 6, 5};
  for (int b = 0; b < 13; ++b) L(b, group[b]) = 1.0;
  m.linking = LinkingMap{L};
  m.damping = {DampingKind::None, 0.0, 0.0};
  return m;
}

SystemMatrices assemble(const ModelDefinition& model, const DesignVector& x) {
  check_design(model, x);
  SystemMatrices s;
  switch (model.kind) {
    case ModelKind::TwoBar: {
      // Lumped single-DOF hinge model: k = sum A_i E_i / l_i,
      // m = sum A_i rho_i l_i / 2.
      const double l1 = model.element_length(0), l2 = model.element_length(1);
      const double k = x.values[0] * model.youngs_modulus[0] / l1 +
                       x.values[1] * model.youngs_modulus[1] / l2;
      const double mm = 0.5 * x.values[0] * model.density[0] * l1 +
                        0.5 * x.values[1] * model.density[1] * l2;
      s.ndof = 1;
      s.mass = Eigen::MatrixXd::Constant(1, 1, mm);
      s.stiffness = Eigen::MatrixXd::Constant(1, 1, k);
      s.damping = Eigen::MatrixXd::Constant(1, 1, model.damping.constant);
      break;
    }
    case ModelKind::ShearFrame: {
      const double L = model.element_length(0);
      const double k1 = shear_column_stiffness(model.youngs_modulus[0], L,
                                               x.values[0]);
      const double k2 = shear_column_stiffness(model.youngs_modulus[1], L,
                                               x.values[1]);
      s.ndof = 2;
      s.stiffness.resize(2, 2);
      s.stiffness << 2 * k1 + 2 * k2, -2 * k2, -2 * k2, 2 * k2;
      s.mass = Eigen::Vector2d(4000.0, 4000.0).asDiagonal();
      s.damping = rayleigh_damping(s.mass, s.stiffness,
                                   model.damping.damping_ratio).C;
      break;
    }
    case ModelKind::PlanarTruss: {
      const Eigen::VectorXd diam = model.linking.apply(x.values);
      auto t = assemble_truss(model, diam);
      s.ndof = model.n_free_dofs();
      s.mass = std::move(t.mass);
      s.stiffness = std::move(t.stiffness);
      s.damping = Eigen::MatrixXd::Zero(s.ndof, s.ndof);
      break;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s.stiffness);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("singular stiffness at design " +
                             design_to_string(x.values));
  return s;
}

MatrixSensitivity assemble_sensitivity(const ModelDefinition& model,
                                       const DesignVector& x, int i) {
  check_design(model, x);
  if (i < 0 || i >= model.n_variables())
    throw std::out_of_range("variable index out of range");
  MatrixSensitivity d;
  d.variable_index = i;
  switch (model.kind) {
    case ModelKind::TwoBar: {
      const double l = model.element_length(i);
      d.dstiffness = Eigen::MatrixXd::Constant(1, 1,
                                               model.youngs_modulus[i] / l);
      d.dmass = Eigen::MatrixXd::Constant(1, 1, 0.5 * model.density[i] * l);
      d.ddamping = Eigen::MatrixXd::Zero(1, 1);
      break;
    }
    case ModelKind::ShearFrame: {
      const double L = model.element_length(i);
      const double dk = shear_column_stiffness_derivative(
          model.youngs_modulus[i], L, x.values[i]);
      d.dstiffness = Eigen::MatrixXd::Zero(2, 2);
      if (i == 0) {
        d.dstiffness(0, 0) = 2 * dk;
      } else {
        d.dstiffness << 2 * dk, -2 * dk, -2 * dk, 2 * dk;
      }
      d.dmass = Eigen::MatrixXd::Zero(2, 2);
      // The damping derivative chains through the Rayleigh coefficients,
      // which depend on the design via the natural frequencies.
      const SystemMatrices s = assemble(model, x);
      const RayleighDamping fit = rayleigh_damping(
          s.mass, s.stiffness, model.damping.damping_ratio);
      d.ddamping = rayleigh_coefficient_sensitivity(
                       s.mass, s.stiffness, d.dmass, d.dstiffness, fit,
                       model.damping.damping_ratio)
                       .dC;
      break;
    }
    case ModelKind::PlanarTruss: {
      const Eigen::VectorXd diam = model.linking.apply(x.values);
      auto t = assemble_truss(model, diam, i);
      d.dmass = std::move(t.mass);
      d.dstiffness = std::move(t.stiffness);
      d.ddamping = Eigen::MatrixXd::Zero(model.n_free_dofs(),
                                         model.n_free_dofs());
      break;
    }
  }
  return d;
}

VolumeResult volume(const ModelDefinition& model, const DesignVector& x) {
  check_design(model, x);
  VolumeResult v;
  const int n = model.n_variables();
  v.gradient = Eigen::VectorXd::Zero(n);
  switch (model.kind) {
    case ModelKind::TwoBar:
      for (int i = 0; i < 2; ++i) {
        const double l = model.element_length(i);
        v.value += x.values[i] * l;
        v.gradient[i] = l;
      }
      break;
    case ModelKind::ShearFrame:
      for (int i = 0; i < 2; ++i) {
        const double l = model.element_length(i);
        v.value += 2.0 * l * kPi * x.values[i] * x.values[i] / 4.0;
        v.gradient[i] = kPi * l * x.values[i];
      }
      break;
    case ModelKind::PlanarTruss: {
      const Eigen::VectorXd diam = model.linking.apply(x.values);
      Eigen::VectorXd per_bar(13);
      for (int b = 0; b < model.n_elements(); ++b) {
        const double l = model.element_length(b);
        v.value += l * kPi * diam[b] * diam[b] / 4.0;
        per_bar[b] = l * kPi * diam[b] / 2.0;
      }
      v.gradient = model.linking.L.transpose() * per_bar;
      break;
    }
  }
  return v;
}

RayleighDamping rayleigh_damping(const Eigen::MatrixXd& mass,
                                 const Eigen::MatrixXd& stiffness, double xi) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness, mass);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("generalized eigenproblem failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("non-positive-definite matrices in Rayleigh fit");
  RayleighDamping r;
  r.omega = es.eigenvalues().cwiseSqrt();
  r.mode_shapes = es.eigenvectors();  // already mass-normalized
  const double w1 = r.omega[0], w2 = r.omega[1];
  r.alpha_m = 2.0 * xi * w1 * w2 / (w1 + w2);
  r.alpha_k = 2.0 * xi / (w1 + w2);
  r.C = r.alpha_m * mass + r.alpha_k * stiffness;
  return r;
}

}  // namespace feslkit
