#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace uzawa {

/// Symmetric (Dunavant) rule on the reference triangle, points in barycentric
/// coordinates, weights summing to 1 (multiply by |T|).
struct TriangleRule {
  int degree = 0;
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
};

/// Smallest tabulated rule exact for polynomials of total degree `degree`
/// (1 <= degree <= 8). Throws std::invalid_argument outside that range.
const TriangleRule& triangle_rule(int degree);

/// Integral over the triangle (a,b,c) of a scalar or vector valued function.
template <class F>
auto integrate(const TriangleRule& rule, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
               const Eigen::Vector2d& c, double area, F&& f) {
  using R = std::decay_t<decltype(f(a))>;
  R sum = rule.weights[0] * f(Eigen::Vector2d(rule.points[0][0] * a + rule.points[0][1] * b + rule.points[0][2] * c));
  for (std::size_t q = 1; q < rule.points.size(); ++q) {
    const auto& l = rule.points[q];
    sum += rule.weights[q] * f(Eigen::Vector2d(l[0] * a + l[1] * b + l[2] * c));
  }
  return R(area * sum);
}

}  // namespace uzawa
