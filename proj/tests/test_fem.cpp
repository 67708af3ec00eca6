#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "uzawa/fem.hpp"
#include "uzawa/problems.hpp"
#include "uzawa/quadrature.hpp"
#include "verify/oracles.hpp"

using namespace uzawa;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

// Library dofs and oracle dofs are both numbered from forest vertices; map
// one onto the other.
Eigen::MatrixXd permutation(const VelocitySpace& s, const oracle::DenseP1& d) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d.n, s.num_dofs);
  for (std::size_t v = 0; v < d.dof.size(); ++v)
    if (d.dof[v] >= 0) p(d.dof[v], s.dof(static_cast<VertexId>(v))) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("stiffness matches the dense oracle") {
  Rng rng(1);
  for (Domain dom : {Domain::UnitSquare, Domain::LShape}) {
    const Triangulation t = oracle::random_conforming(dom, rng, 200);
    const auto s = make_velocity_space(t);
    const auto d = oracle::dense_stiffness(t);
    REQUIRE(d.n == s->num_dofs);
    const Eigen::MatrixXd p = permutation(*s, d);
    const Eigen::MatrixXd k = dense(assemble_stiffness(*s));
    CHECK((p * k * p.transpose() - d.stiffness).norm() <= 1e-12 * d.stiffness.norm());
    CHECK((k - k.transpose()).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("4-element square: a single interior dof") {
  const Triangulation t = refine_uniform(initial_mesh(Domain::UnitSquare), 1);
  const auto s = make_velocity_space(t);
  REQUIRE(s->num_dofs == 1);
  // The hat at the centre: four right triangles of area 1/4, |grad| = sqrt(2).
  CHECK(dense(assemble_stiffness(*s))(0, 0) == doctest::Approx(4.0));
  CHECK(s->interior_edges.size() == 4);
}

TEST_CASE("energy and divergence norms agree with direct computation") {
  Rng rng(2);
  const Triangulation t = oracle::random_conforming(Domain::LShape, rng, 300);
  const auto s = make_velocity_space(t);
  const Eigen::MatrixXd k = dense(assemble_stiffness(*s));
  for (int trial = 0; trial < 10; ++trial) {
    const VelocityField v = oracle::random_velocity(s, rng);
    const auto ref = oracle::field_norms(v);
    const double a = v.values.col(0).dot(k * v.values.col(0)) + v.values.col(1).dot(k * v.values.col(1));
    CHECK(energy_norm(v) * energy_norm(v) == doctest::Approx(ref.grad_sq).epsilon(1e-12));
    CHECK(a == doctest::Approx(ref.grad_sq).epsilon(1e-12));
    CHECK(div_norm(v) * div_norm(v) == doctest::Approx(ref.div_sq).epsilon(1e-12));
  }
}

TEST_CASE("divergence matrix matches the dense oracle") {
  Rng rng(3);
  const Triangulation t0 = initial_mesh(Domain::UnitSquare);
  const Partition p = oracle::random_partition(t0, rng, 6);
  Triangulation t = close(p);
  t = refine_uniform(t, 1);
  const auto s = make_velocity_space(t);
  const auto d = oracle::dense_stiffness(t);
  const Eigen::MatrixXd perm = permutation(*s, d);
  Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(2 * d.n, 2 * s->num_dofs);
  p2.topLeftCorner(d.n, s->num_dofs) = perm;
  p2.bottomRightCorner(d.n, s->num_dofs) = perm;
  const Eigen::MatrixXd b = dense(assemble_divergence(*s, p));
  const Eigen::MatrixXd ref = oracle::dense_divergence(t, d, p);
  // b(v, q) = -(div v, q)
  CHECK((b * p2.transpose() + ref).norm() <= 1e-12 * ref.norm());

  const Triangulation coarse = initial_mesh(Domain::UnitSquare);
  const auto fine = refine_uniform(coarse, 3);
  const auto s_fine = make_velocity_space(fine);
  CHECK_NOTHROW(assemble_divergence(*s_fine, fine));
  const Partition deeper = refine_uniform(fine, 1);
  CHECK_THROWS_AS(assemble_divergence(*s_fine, deeper), ContractViolation);
}

TEST_CASE("L2 projection of the divergence") {
  Rng rng(4);
  const Triangulation t = oracle::random_conforming(Domain::UnitSquare, rng, 200);
  const auto s = make_velocity_space(t);
  const VelocityField v = oracle::random_velocity(s, rng);

  // On the triangulation itself the projection is exact.
  const PressureField q = l2_project_div(t, v);
  for (int e = 0; e < static_cast<int>(t.size()); ++e) CHECK(q.coeffs[e] == doctest::Approx(v.divergence(e)));

  // On the initial partition it is the area-weighted mean.
  const Triangulation t0 = initial_triangulation(t.forest);
  const PressureField q0 = l2_project_div(t0, v);
  CHECK(l2_norm(q0) <= div_norm(v) + 1e-12);
  for (int i = 0; i < 2; ++i) {
    double num = 0, den = 0;
    for (int e = 0; e < static_cast<int>(t.size()); ++e)
      if (t.mesh().root_of(t.leaves[e]) == t0.leaves[i]) {
        num += s->area[e] * v.divergence(e);
        den += s->area[e];
      }
    CHECK(q0.coeffs[i] == doctest::Approx(num / den).epsilon(1e-12));
  }
  // A zero-trace field has zero total divergence.
  CHECK(std::abs(integral_mean(q)) <= 1e-12);
}

TEST_CASE("quadrature rules are exact to their degree") {
  const Vec2 a(0.1, -0.2), b(1.3, 0.4), c(0.2, 0.9);
  const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  for (int deg = 1; deg <= 8; ++deg) {
    const auto& rule = triangle_rule(deg);
    CHECK(rule.degree >= deg);
    double wsum = 0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i <= deg; ++i) {
      const int j = deg - i;
      const auto g = [&](const Vec2& x) { return std::pow(x.x(), i) * std::pow(x.y(), j); };
      CHECK(integrate(rule, a, b, c, area, g) == doctest::Approx(oracle::integrate(g, a, b, c)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(triangle_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(triangle_rule(9), std::invalid_argument);
}

TEST_CASE("load vector") {
  const Triangulation t = refine_uniform(initial_mesh(Domain::UnitSquare), 1);
  const auto s = make_velocity_space(t);
  BodyForce f;
  f.f = [](const Vec2&) { return Vec2(1.0, -2.0); };
  // Integral of the centre hat: 4 * (1/4) / 3 = 1/3.
  const Eigen::MatrixX2d l = load_vector(*s, f, 4);
  CHECK(l(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(l(0, 1) == doctest::Approx(-2.0 / 3.0));

  BodyForce zero;
  zero.f = [](const Vec2&) { return Vec2(0.0, 0.0); };
  zero.identically_zero = true;
  CHECK(load_vector(*s, zero, 4).isZero());
}

TEST_CASE("prolongation preserves the function") {
  Rng rng(5);
  const Triangulation t = oracle::random_conforming(Domain::LShape, rng, 100);
  const auto s = make_velocity_space(t);
  const VelocityField v = oracle::random_velocity(s, rng);
  const Triangulation fine = refine_uniform(t, 2);
  const VelocityField w = prolongate(v, make_velocity_space(fine));
  CHECK(energy_norm(w) == doctest::Approx(energy_norm(v)).epsilon(1e-12));
  CHECK(div_norm(w) == doctest::Approx(div_norm(v)).epsilon(1e-12));
  CHECK(energy_norm(prolongate(w, s) - v) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pressure transfer and zero mean") {
  Rng rng(6);
  const Triangulation t0 = initial_mesh(Domain::UnitSquare);
  const Partition p = oracle::random_partition(t0, rng, 8);
  PressureField q = zero_pressure(p);
  for (Eigen::Index i = 0; i < q.coeffs.size(); ++i) q.coeffs[i] = rng.uniform(-1, 1) + 3.0;
  CHECK(integral_mean(q) > 2.0);
  const double before = l2_norm(q);
  enforce_zero_mean(q);
  CHECK(std::abs(integral_mean(q)) <= 1e-13);
  CHECK(l2_norm(q) < before);

  const Partition finer = oracle::random_partition(p, rng, 8);
  const PressureField r = transfer(q, finer);
  CHECK(l2_norm(r) == doctest::Approx(l2_norm(q)).epsilon(1e-12));
  CHECK(l2_dot(r, transfer(q, finer)) == doctest::Approx(l2_norm(q) * l2_norm(q)).epsilon(1e-12));
  CHECK(l2_norm(r - 2.0 * r + r) == doctest::Approx(0.0));
  CHECK(leaf_areas(finer).sum() == doctest::Approx(1.0));
}

TEST_CASE("non-conforming input is rejected") {
  const Triangulation t = initial_mesh(Domain::UnitSquare);
  const ElementId first = t.leaves[0];
  CHECK_THROWS_AS(make_velocity_space(bisect_partition(t, std::span(&first, 1))), ContractViolation);
}

TEST_CASE("problems: exact solutions satisfy the equations") {
  const double h = 1e-4;
  for (const std::string name : {"smooth", "l_shape_constant"}) {
    const Problem pr = make_problem(name);
    const auto& bf = pr.force;
    REQUIRE(bf.u_exact);
    REQUIRE(bf.p_exact);
    Rng rng(7);
    for (int k = 0; k < 30; ++k) {
      Vec2 x(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
      if (pr.domain == Domain::LShape) x = x * 2.0 - Vec2(1.0, 1.0);
      const Vec2 ex(h, 0), ey(0, h);
      const auto u = bf.u_exact;
      const Vec2 lap = (u(x + ex) + u(x - ex) + u(x + ey) + u(x - ey) - 4.0 * u(x)) / (h * h);
      const Vec2 gp((bf.p_exact(x + ex) - bf.p_exact(x - ex)) / (2 * h),
                    (bf.p_exact(x + ey) - bf.p_exact(x - ey)) / (2 * h));
      CHECK((-lap + gp - bf.f(x)).norm() <= 1e-5);
      const double div = (u(x + ex).x() - u(x - ex).x() + u(x + ey).y() - u(x - ey).y()) / (2 * h);
      CHECK(std::abs(div) <= 1e-8);
    }
  }
}

TEST_CASE("problems: boundary values and pressure mean") {
  const Problem sm = make_problem("smooth");
  for (double s : {0.0, 0.3, 0.77, 1.0}) {
    for (const Vec2& x : {Vec2(s, 0), Vec2(s, 1), Vec2(0, s), Vec2(1, s)})
      CHECK(sm.force.u_exact(x).norm() <= 1e-14);
  }
  for (const std::string name : {"smooth", "l_shape_constant"}) {
    const Problem pr = make_problem(name);
    const Triangulation t = initial_mesh(pr.domain);
    double mean = 0;
    for (ElementId id : t.leaves) {
      const auto& v = t.mesh().element(id).v;
      mean += oracle::integrate(pr.force.p_exact, t.mesh().vertex(v[0]), t.mesh().vertex(v[1]),
                                t.mesh().vertex(v[2]));
    }
    CHECK(std::abs(mean) <= 1e-12);
  }
  CHECK(make_problem("zero").force.identically_zero);
  CHECK_THROWS_AS(make_problem("nope"), ValidationError);
  CHECK(problem_names().size() >= 4);
}
