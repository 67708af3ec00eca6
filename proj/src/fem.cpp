#include "uzawa/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "uzawa/quadrature.hpp"

namespace uzawa {

int VelocitySpace::element_index(ElementId id) const {
  const auto it = std::lower_bound(tri.leaves.begin(), tri.leaves.end(), id);
  if (it == tri.leaves.end() || *it != id) return -1;
  return static_cast<int>(it - tri.leaves.begin());
}

std::shared_ptr<const VelocitySpace> make_velocity_space(const Triangulation& tri) {
  if (!tri.conforming) throw ContractViolation("velocity space requires a conforming triangulation");
  const auto& f = *tri.forest;
  auto space = std::make_shared<VelocitySpace>();
  space->tri = tri;
  const std::size_t ne = tri.size();
  space->elem_vertices.resize(ne);
  space->area.resize(ne);
  space->hat_gradients.resize(ne);

  struct Half {
    int elem;
    VertexId a, b;
  };
  std::unordered_map<std::uint64_t, std::array<Half, 2>> edges;
  std::unordered_map<std::uint64_t, int> edge_count;
  edges.reserve(ne * 2);
  edge_count.reserve(ne * 2);

  for (std::size_t e = 0; e < ne; ++e) {
    const auto& v = f.element(tri.leaves[e]).v;
    space->elem_vertices[e] = v;
    const Vec2& p0 = f.vertex(v[0]);
    const Vec2& p1 = f.vertex(v[1]);
    const Vec2& p2 = f.vertex(v[2]);
    const double area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
    space->area[e] = area;
    const std::array<const Vec2*, 3> p{&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      const Vec2 d = *p[(k + 2) % 3] - *p[(k + 1) % 3];
      space->hat_gradients[e].col(k) = Vec2(-d.y(), d.x()) / (2.0 * area);
    }
    for (int r = 0; r < 3; ++r) {
      const VertexId a = v[r], b = v[(r + 1) % 3];
      const auto key = edge_key(a, b);
      const int c = edge_count[key]++;
      if (c >= 2) throw ContractViolation("edge shared by more than two elements");
      edges[key][static_cast<std::size_t>(c)] = Half{static_cast<int>(e), a, b};
    }
  }

  space->vertex_dof.assign(f.num_vertices(), VelocitySpace::kAbsent);
  for (const auto& v : space->elem_vertices)
    for (VertexId w : v) space->vertex_dof[w] = 0;
  for (const auto& [key, cnt] : edge_count) {
    if (cnt != 1) continue;
    const auto& h = edges[key][0];
    space->vertex_dof[h.a] = VelocitySpace::kBoundary;
    space->vertex_dof[h.b] = VelocitySpace::kBoundary;
  }
  int next = 0;
  for (auto& d : space->vertex_dof)
    if (d == 0) d = next++;
  space->num_dofs = next;

  space->interior_edges.reserve(edge_count.size());
  for (const auto& [key, cnt] : edge_count) {
    if (cnt != 2) continue;
    const auto& h = edges[key];
    VelocitySpace::InteriorEdge ie;
    // Deterministic orientation: `plus` is the smaller element index.
    const int s = h[0].elem < h[1].elem ? 0 : 1;
    ie.plus = h[s].elem;
    ie.minus = h[1 - s].elem;
    ie.a = h[s].a;
    ie.b = h[s].b;
    const Vec2 d = f.vertex(ie.b) - f.vertex(ie.a);
    ie.length = d.norm();
    ie.normal = Vec2(d.y(), -d.x()) / ie.length;
    space->interior_edges.push_back(ie);
  }
  std::sort(space->interior_edges.begin(), space->interior_edges.end(),
            [](const auto& x, const auto& y) { return std::tie(x.plus, x.minus) < std::tie(y.plus, y.minus); });
  return space;
}

Mat2 VelocityField::gradient(int e) const {
  Mat2 g = Mat2::Zero();
  const auto& v = space->elem_vertices[static_cast<std::size_t>(e)];
  const auto& grads = space->hat_gradients[static_cast<std::size_t>(e)];
  for (int k = 0; k < 3; ++k) {
    const int d = space->dof(v[k]);
    if (d < 0) continue;
    g += values.row(d).transpose() * grads.col(k).transpose();
  }
  return g;
}

Vec2 VelocityField::nodal_value(VertexId v) const {
  const int d = space->dof(v);
  if (d == VelocitySpace::kAbsent) throw ContractViolation("vertex is not part of the triangulation");
  return d < 0 ? Vec2::Zero() : Vec2(values.row(d).transpose());
}

VelocityField zero_velocity(std::shared_ptr<const VelocitySpace> space) {
  VelocityField v;
  v.values = Eigen::MatrixX2d::Zero(space->num_dofs, 2);
  v.space = std::move(space);
  return v;
}

PressureField zero_pressure(const Partition& p) {
  PressureField q;
  q.partition = p;
  q.coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size()));
  return q;
}

VelocityField interpolate(std::shared_ptr<const VelocitySpace> space, const std::function<Vec2(const Vec2&)>& g) {
  VelocityField v = zero_velocity(space);
  const auto& f = *space->tri.forest;
  for (std::size_t w = 0; w < space->vertex_dof.size(); ++w) {
    const int d = space->vertex_dof[w];
    if (d >= 0) v.values.row(d) = g(f.vertex(static_cast<VertexId>(w))).transpose();
  }
  return v;
}

SparseMatrix assemble_stiffness(const VelocitySpace& space) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.num_elements() * 9);
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const auto& v = space.elem_vertices[e];
    const auto& g = space.hat_gradients[e];
    const Eigen::Matrix3d local = space.area[e] * (g.transpose() * g);
    for (int i = 0; i < 3; ++i) {
      const int di = space.dof(v[i]);
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = space.dof(v[j]);
        if (dj >= 0) trip.emplace_back(di, dj, local(i, j));
      }
    }
  }
  SparseMatrix k(space.num_dofs, space.num_dofs);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SparseMatrix assemble_divergence(const VelocitySpace& space, const Partition& p) {
  const auto owner = ancestor_index(space.tri, p);
  const int n = space.num_dofs;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.num_elements() * 6);
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const auto& v = space.elem_vertices[e];
    const auto& g = space.hat_gradients[e];
    for (int k = 0; k < 3; ++k) {
      const int d = space.dof(v[k]);
      if (d < 0) continue;
      trip.emplace_back(owner[e], d, -space.area[e] * g(0, k));
      trip.emplace_back(owner[e], n + d, -space.area[e] * g(1, k));
    }
  }
  SparseMatrix b(static_cast<Eigen::Index>(p.size()), 2 * n);
  b.setFromTriplets(trip.begin(), trip.end());
  return b;
}

Eigen::MatrixX2d load_vector(const VelocitySpace& space, const BodyForce& force, int quad_order) {
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(space.num_dofs, 2);
  if (force.identically_zero || !force.f) return rhs;
  const auto& rule = triangle_rule(quad_order);
  const auto& f = *space.tri.forest;
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const auto& v = space.elem_vertices[e];
    const Vec2& p0 = f.vertex(v[0]);
    const Vec2& p1 = f.vertex(v[1]);
    const Vec2& p2 = f.vertex(v[2]);
    Eigen::Matrix<double, 3, 2> local = Eigen::Matrix<double, 3, 2>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const Vec2 val = force.f(l[0] * p0 + l[1] * p1 + l[2] * p2);
      local += rule.weights[q] * l * val.transpose();
    }
    local *= space.area[e];
    for (int k = 0; k < 3; ++k) {
      const int d = space.dof(v[k]);
      if (d >= 0) rhs.row(d) += local.row(k);
    }
  }
  return rhs;
}

Eigen::VectorXd leaf_areas(const Partition& p) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) a[static_cast<Eigen::Index>(i)] = p.forest->area(p.leaves[i]);
  return a;
}

PressureField l2_project_div(const Partition& p, const VelocityField& v) {
  const auto& space = *v.space;
  const auto owner = ancestor_index(space.tri, p);
  PressureField q = zero_pressure(p);
  for (std::size_t e = 0; e < space.num_elements(); ++e)
    q.coeffs[owner[e]] += space.area[e] * v.divergence(static_cast<int>(e));
  q.coeffs.array() /= leaf_areas(p).array();
  enforce_zero_mean(q);
  return q;
}

PressureField transfer(const PressureField& q, const Partition& finer) {
  if (q.degree != 0) throw std::invalid_argument("only piecewise constant pressures are supported");
  const auto owner = ancestor_index(finer, q.partition);
  PressureField out = zero_pressure(finer);
  for (std::size_t i = 0; i < owner.size(); ++i) out.coeffs[static_cast<Eigen::Index>(i)] = q.coeffs[owner[i]];
  return out;
}

VelocityField prolongate(const VelocityField& v, std::shared_ptr<const VelocitySpace> finer) {
  const auto& coarse = *v.space;
  const auto& f = *finer->tri.forest;
  std::unordered_map<VertexId, Vec2> memo;
  std::function<Vec2(VertexId)> value = [&](VertexId w) -> Vec2 {
    const int d = coarse.dof(w);
    if (d >= 0) return v.values.row(d).transpose();
    if (d == VelocitySpace::kBoundary) return Vec2::Zero();
    if (auto it = memo.find(w); it != memo.end()) return it->second;
    const auto [a, b] = f.parent_edge(w);
    if (a < 0) throw ContractViolation("prolongate: target does not refine the source triangulation");
    const Vec2 r = 0.5 * (value(a) + value(b));
    memo.emplace(w, r);
    return r;
  };
  VelocityField out = zero_velocity(finer);
  for (std::size_t w = 0; w < finer->vertex_dof.size(); ++w) {
    const int d = finer->vertex_dof[w];
    if (d >= 0) out.values.row(d) = value(static_cast<VertexId>(w)).transpose();
  }
  return out;
}

double integral_mean(const PressureField& q) {
  const Eigen::VectorXd a = leaf_areas(q.partition);
  return a.dot(q.coeffs) / a.sum();
}

void enforce_zero_mean(PressureField& q, double rel_tol) {
  const double m = integral_mean(q);
  if (std::abs(m) > rel_tol * l2_norm(q)) q.coeffs.array() -= m;
}

namespace {
void require_same_partition(const PressureField& a, const PressureField& b) {
  if (a.partition.forest != b.partition.forest || a.partition.leaves != b.partition.leaves)
    throw ContractViolation("pressure fields live on different partitions");
}
void require_same_space(const VelocityField& a, const VelocityField& b) {
  if (a.space != b.space && a.space->tri.leaves != b.space->tri.leaves)
    throw ContractViolation("velocity fields live on different triangulations");
}
}  // namespace

PressureField operator-(const PressureField& a, const PressureField& b) {
  require_same_partition(a, b);
  PressureField r = a;
  r.coeffs -= b.coeffs;
  return r;
}

PressureField operator+(const PressureField& a, const PressureField& b) {
  require_same_partition(a, b);
  PressureField r = a;
  r.coeffs += b.coeffs;
  return r;
}

PressureField operator*(double s, const PressureField& a) {
  PressureField r = a;
  r.coeffs *= s;
  return r;
}

VelocityField operator-(const VelocityField& a, const VelocityField& b) {
  require_same_space(a, b);
  VelocityField r = a;
  r.values -= b.values;
  return r;
}

VelocityField operator+(const VelocityField& a, const VelocityField& b) {
  require_same_space(a, b);
  VelocityField r = a;
  r.values += b.values;
  return r;
}

Norms norms(const VelocityField& v) {
  double energy = 0.0, div = 0.0;
  for (std::size_t e = 0; e < v.space->num_elements(); ++e) {
    const Mat2 g = v.gradient(static_cast<int>(e));
    energy += v.space->area[e] * g.squaredNorm();
    div += v.space->area[e] * g.trace() * g.trace();
  }
  return {std::sqrt(energy), std::sqrt(div)};
}

double energy_norm(const VelocityField& v) { return norms(v).energy; }
double div_norm(const VelocityField& v) { return norms(v).div; }

double energy_dot(const VelocityField& a, const VelocityField& b) {
  require_same_space(a, b);
  double s = 0.0;
  for (std::size_t e = 0; e < a.space->num_elements(); ++e)
    s += a.space->area[e] * (a.gradient(static_cast<int>(e)).cwiseProduct(b.gradient(static_cast<int>(e)))).sum();
  return s;
}

double l2_norm(const PressureField& q) {
  return std::sqrt((leaf_areas(q.partition).array() * q.coeffs.array().square()).sum());
}

double l2_dot(const PressureField& a, const PressureField& b) {
  require_same_partition(a, b);
  return (leaf_areas(a.partition).array() * a.coeffs.array() * b.coeffs.array()).sum();
}

}  // namespace uzawa
