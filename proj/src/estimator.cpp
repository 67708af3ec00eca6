#include "uzawa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "uzawa/quadrature.hpp"

namespace uzawa {

double EstimatorReport::element(ElementId id) const {
  const auto it = std::lower_bound(tri.leaves.begin(), tri.leaves.end(), id);
  if (it == tri.leaves.end() || *it != id) throw ContractViolation("element is not a leaf of the triangulation");
  return eta_sq[it - tri.leaves.begin()];
}

Estimator::Estimator(std::shared_ptr<const VelocitySpace> space, const BodyForce& f, int quad_order)
    : space_(std::move(space)), volume_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space_->num_elements()))) {
  if (f.identically_zero || !f.f) return;
  const auto& rule = triangle_rule(quad_order);
  const auto& forest = *space_->tri.forest;
  for (std::size_t e = 0; e < space_->num_elements(); ++e) {
    const auto& v = space_->elem_vertices[e];
    const double a = space_->area[e];
    const double ff = integrate(rule, forest.vertex(v[0]), forest.vertex(v[1]), forest.vertex(v[2]), a,
                                [&](const Vec2& x) { return f.f(x).squaredNorm(); });
    // h_T^2 = |T| in two dimensions.
    volume_[static_cast<Eigen::Index>(e)] = a * ff;
  }
}

Eigen::VectorXd Estimator::indicators(const VelocityField& u, const Eigen::VectorXd& qe) const {
  if (u.space->tri.leaves != space_->tri.leaves) throw ContractViolation("velocity lives on another triangulation");
  const auto& sp = *space_;
  Eigen::VectorXd eta_sq = volume_;
  std::vector<Mat2> grad(sp.num_elements());
  for (std::size_t e = 0; e < sp.num_elements(); ++e) grad[e] = u.gradient(static_cast<int>(e));
  for (const auto& edge : sp.interior_edges) {
    const auto p = static_cast<std::size_t>(edge.plus), m = static_cast<std::size_t>(edge.minus);
    // Jump of the normal stress (Q I - grad V) n across the edge.
    const Vec2 jump = (qe[edge.plus] - qe[edge.minus]) * edge.normal - (grad[p] - grad[m]) * edge.normal;
    const double j = edge.length * jump.squaredNorm();
    eta_sq[edge.plus] += std::sqrt(sp.area[p]) * j;
    eta_sq[edge.minus] += std::sqrt(sp.area[m]) * j;
  }
  return eta_sq;
}

EstimatorReport Estimator::operator()(const VelocityField& u, const PressureField& q) const {
  if (q.degree != 0) throw ContractViolation("only piecewise constant pressures are supported");
  EstimatorReport r;
  r.tri = space_->tri;
  r.eta_sq = indicators(u, transfer(q, space_->tri).coeffs);
  r.eta_sq_total = r.eta_sq.sum();
  r.eta = std::sqrt(r.eta_sq_total);
  r.pressure_partition = q.partition;
  r.div_norm = div_norm(u);
  r.proj_div_norm = l2_norm(l2_project_div(q.partition, u));
  return r;
}

EstimatorReport estimate(const VelocityField& u, const PressureField& q, const BodyForce& f, int quad_order) {
  return Estimator(u.space, f, quad_order)(u, q);
}

double estimate_subset(const EstimatorReport& r, std::span<const ElementId> subset) {
  double s = 0.0;
  for (ElementId id : subset) s += r.element(id);
  return std::sqrt(s);
}

std::vector<ElementId> doerfler_mark(const EstimatorReport& r, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ContractViolation("marking parameter must lie in (0, 1]");
  std::vector<std::size_t> order(r.tri.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ea = r.eta_sq[static_cast<Eigen::Index>(a)], eb = r.eta_sq[static_cast<Eigen::Index>(b)];
    return ea != eb ? ea > eb : r.tri.leaves[a] < r.tri.leaves[b];
  });
  // Summing in the same order as the prefix keeps the final comparison exact.
  double total = 0.0;
  for (std::size_t i : order) total += r.eta_sq[static_cast<Eigen::Index>(i)];
  std::vector<ElementId> marked;
  if (total <= 0.0) return marked;
  const double target = theta * total;
  double acc = 0.0;
  for (std::size_t i : order) {
    marked.push_back(r.tri.leaves[i]);
    acc += r.eta_sq[static_cast<Eigen::Index>(i)];
    if (acc >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

void write_indicators_csv(std::ostream& os, const EstimatorReport& r) {
  os << "elem_id,eta_sq\n";
  for (std::size_t i = 0; i < r.tri.size(); ++i) os << r.tri.leaves[i] << ',' << r.eta_sq[static_cast<Eigen::Index>(i)] << '\n';
}

}  // namespace uzawa
