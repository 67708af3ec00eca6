#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "uzawa/mesh.hpp"

namespace uzawa {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Geometry and degree-of-freedom numbering of continuous piecewise linear
/// vector fields on a conforming triangulation, with zero trace on the
/// boundary. Element index `e` refers to `tri.leaves[e]`.
struct VelocitySpace {
  struct InteriorEdge {
    int plus = -1;   ///< element index on the side the normal points away from
    int minus = -1;  ///< element index on the other side
    VertexId a = -1, b = -1;
    Vec2 normal;  ///< unit normal, outward from `plus`
    double length = 0.0;
  };

  Triangulation tri;
  /// Per forest vertex: free dof index, kBoundary, or kAbsent.
  std::vector<int> vertex_dof;
  int num_dofs = 0;
  std::vector<std::array<VertexId, 3>> elem_vertices;
  std::vector<double> area;
  /// Columns are the gradients of the three barycentric hat functions.
  std::vector<Eigen::Matrix<double, 2, 3>> hat_gradients;
  std::vector<InteriorEdge> interior_edges;

  static constexpr int kBoundary = -1;
  static constexpr int kAbsent = -2;

  std::size_t num_elements() const { return elem_vertices.size(); }
  /// Index of leaf `id` in `tri.leaves`, or -1.
  int element_index(ElementId id) const;
  int dof(VertexId v) const {
    return static_cast<std::size_t>(v) < vertex_dof.size() ? vertex_dof[static_cast<std::size_t>(v)] : kAbsent;
  }
};

/// Builds the P1 velocity space. Throws ContractViolation for non-conforming input.
std::shared_ptr<const VelocitySpace> make_velocity_space(const Triangulation& tri);

/// Continuous piecewise linear velocity; row `d` of `values` holds both
/// components at free dof `d`. Boundary values are zero and not stored.
struct VelocityField {
  std::shared_ptr<const VelocitySpace> space;
  int degree = 1;
  Eigen::MatrixX2d values;

  /// Jacobian (row = component, column = derivative direction) on element `e`.
  Mat2 gradient(int e) const;
  double divergence(int e) const { return gradient(e).trace(); }
  Vec2 nodal_value(VertexId v) const;
};

/// Piecewise polynomial pressure of degree `degree` on a partition. Only
/// degree 0 (one coefficient per leaf) is implemented.
struct PressureField {
  Partition partition;
  int degree = 0;
  Eigen::VectorXd coeffs;
};

/// Right-hand side data, optionally with a known exact Stokes solution.
struct BodyForce {
  std::string name;
  std::function<Vec2(const Vec2&)> f;
  std::function<Vec2(const Vec2&)> u_exact;
  std::function<double(const Vec2&)> p_exact;
  bool identically_zero = false;
};

VelocityField zero_velocity(std::shared_ptr<const VelocitySpace> space);
PressureField zero_pressure(const Partition& p);
/// Nodal interpolation of `g` (boundary values are dropped).
VelocityField interpolate(std::shared_ptr<const VelocitySpace> space, const std::function<Vec2(const Vec2&)>& g);

/// Flattened dof vector: x components then y components.
inline Eigen::Map<const Eigen::VectorXd> flat(const Eigen::MatrixX2d& m) {
  return {m.data(), m.size()};
}
inline Eigen::Map<Eigen::VectorXd> flat(Eigen::MatrixX2d& m) { return {m.data(), m.size()}; }

/// Scalar stiffness matrix of the free dofs; a(.,.) is block diagonal with
/// two copies of it.
SparseMatrix assemble_stiffness(const VelocitySpace& space);
/// Matrix of b(v, q) = -(div v, q): rows = leaves of `p`, columns = flattened
/// velocity dofs. Throws ContractViolation unless the triangulation refines `p`.
SparseMatrix assemble_divergence(const VelocitySpace& space, const Partition& p);
/// <f, phi> per free dof and component.
Eigen::MatrixX2d load_vector(const VelocitySpace& space, const BodyForce& f, int quad_order);

/// Elementwise L2 projection of div V onto piecewise constants on `p`.
PressureField l2_project_div(const Partition& p, const VelocityField& v);
/// The same pressure expressed on a refinement of its partition.
PressureField transfer(const PressureField& q, const Partition& finer);
/// Interpolation of V into a finer velocity space of the same forest.
VelocityField prolongate(const VelocityField& v, std::shared_ptr<const VelocitySpace> finer);

double integral_mean(const PressureField& q);
/// Subtracts the mean when it exceeds `rel_tol` times the L2 norm.
void enforce_zero_mean(PressureField& q, double rel_tol = 1e-13);

PressureField operator-(const PressureField& a, const PressureField& b);
PressureField operator+(const PressureField& a, const PressureField& b);
PressureField operator*(double s, const PressureField& a);

double energy_norm(const VelocityField& v);
double div_norm(const VelocityField& v);
double l2_norm(const PressureField& q);
/// L2 inner product of two pressures on the same partition.
double l2_dot(const PressureField& a, const PressureField& b);
double energy_dot(const VelocityField& a, const VelocityField& b);

struct Norms {
  double energy = 0.0;
  double div = 0.0;
};
Norms norms(const VelocityField& v);

VelocityField operator-(const VelocityField& a, const VelocityField& b);
VelocityField operator+(const VelocityField& a, const VelocityField& b);

/// Areas of the leaves of a partition, in leaf order.
Eigen::VectorXd leaf_areas(const Partition& p);

}  // namespace uzawa
