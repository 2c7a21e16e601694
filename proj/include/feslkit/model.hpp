#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace feslkit {

/// Optimization variables with box bounds. All models require strictly
/// positive sections, so lower > 0 everywhere.
struct DesignVector {
  Eigen::VectorXd values;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int size() const { return static_cast<int>(values.size()); }
  bool in_bounds(double tol = 0.0) const;
};

/// Dense symmetric system matrices on the free DOFs.
struct SystemMatrices {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd damping;
  Eigen::MatrixXd stiffness;
  int ndof = 0;
};

/// Analytic derivatives of the system matrices w.r.t. one design variable.
struct MatrixSensitivity {
  Eigen::MatrixXd dmass;
  Eigen::MatrixXd ddamping;
  Eigen::MatrixXd dstiffness;
  int variable_index = -1;
};

/// 0/1 incidence matrix mapping size-group variables to element sections,
/// D = L x. Each element belongs to exactly one group.
struct LinkingMap {
  Eigen::MatrixXd L;  // n_elements x n_variables

  static LinkingMap identity(int n);
  int group_of(int element) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return L * x; }
};

enum class ModelKind { TwoBar, ShearFrame, PlanarTruss };

enum class DampingKind { None, Constant, Rayleigh };

struct DampingSpec {
  DampingKind kind = DampingKind::None;
  double constant = 0.0;       // viscous coefficient for Constant
  double damping_ratio = 0.0;  // xi for Rayleigh
};

/// Geometry, material and support data for one of the three model families.
struct ModelDefinition {
  ModelKind kind = ModelKind::TwoBar;
  Eigen::MatrixX2d nodes;                 // nodal coordinates [m]
  Eigen::MatrixX2i elements;              // connectivity (0-based node ids)
  Eigen::VectorXd youngs_modulus;         // per element [Pa]
  Eigen::VectorXd density;                // per element [kg/m^3]
  std::vector<int> fixed_nodes;           // fully clamped nodes (truss)
  LinkingMap linking;
  DampingSpec damping;

  int n_elements() const { return static_cast<int>(elements.rows()); }
  int n_variables() const { return static_cast<int>(linking.L.cols()); }
  int n_free_dofs() const;
  double element_length(int e) const;
  /// Global DOF index of (node, component) or -1 when constrained.
  int free_dof(int node, int comp) const;
};

/// Result of the Rayleigh damping construction: C = aM*M + aK*K with the
/// coefficients fit to the target ratio at the first two frequencies.
struct RayleighDamping {
  Eigen::MatrixXd C;
  double alpha_m = 0.0;
  double alpha_k = 0.0;
  Eigen::VectorXd omega;      // natural frequencies, ascending [rad/s]
  Eigen::MatrixXd mode_shapes;  // mass-normalized, one column per mode
};

struct VolumeResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

ModelDefinition make_two_bar_model();
ModelDefinition make_shear_frame_model();
ModelDefinition make_planar_truss_model();

SystemMatrices assemble(const ModelDefinition& model, const DesignVector& x);
MatrixSensitivity assemble_sensitivity(const ModelDefinition& model,
                                       const DesignVector& x, int i);
VolumeResult volume(const ModelDefinition& model, const DesignVector& x);
RayleighDamping rayleigh_damping(const Eigen::MatrixXd& mass,
                                 const Eigen::MatrixXd& stiffness, double xi);

}  // namespace feslkit
