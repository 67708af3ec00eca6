#include "uzawa/problems.hpp"

namespace uzawa {

namespace {

Problem smooth() {
  Problem pr{"smooth", Domain::UnitSquare, {}};
  pr.force.name = "smooth";
  // With X = x^2 - x and Y = y^2 - y:
  //   -lap u1 = -4 (2y - 1) (3X^2 + 6XY + Y),  -lap u2 = 4 (2x - 1) (X + 6XY + 3Y^2).
  pr.force.f = [](const Vec2& z) {
    const double x = z.x(), y = z.y();
    const double X = x * x - x, Y = y * y - y;
    return Vec2(-4.0 * (2 * y - 1) * (3 * X * X + 6 * X * Y + Y) + 3 * x * x,
                4.0 * (2 * x - 1) * (X + 6 * X * Y + 3 * Y * Y) + 3 * y * y);
  };
  pr.force.u_exact = [](const Vec2& z) {
    const double x = z.x(), y = z.y();
    return Vec2(2 * x * x * (x - 1) * (x - 1) * y * (y - 1) * (2 * y - 1),
                -2 * x * (x - 1) * (2 * x - 1) * y * y * (y - 1) * (y - 1));
  };
  pr.force.p_exact = [](const Vec2& z) { return z.x() * z.x() * z.x() + z.y() * z.y() * z.y() - 0.5; };
  return pr;
}

}  // namespace

Problem make_problem(const std::string& name) {
  if (name == "smooth") return smooth();
  if (name == "zero") {
    Problem pr{"zero", Domain::UnitSquare, {}};
    pr.force.name = "zero";
    pr.force.f = [](const Vec2&) { return Vec2(0, 0); };
    pr.force.u_exact = pr.force.f;
    pr.force.p_exact = [](const Vec2&) { return 0.0; };
    pr.force.identically_zero = true;
    return pr;
  }
  if (name == "l_shape") {
    Problem pr{"l_shape", Domain::LShape, {}};
    pr.force.name = "l_shape";
    pr.force.f = [](const Vec2& z) { return Vec2(-z.y(), z.x()); };
    return pr;
  }
  if (name == "l_shape_constant") {
    Problem pr{"l_shape_constant", Domain::LShape, {}};
    pr.force.name = "l_shape_constant";
    pr.force.f = [](const Vec2&) { return Vec2(1, 1); };
    pr.force.u_exact = [](const Vec2&) { return Vec2(0, 0); };
    // x + y already has zero mean on the L-shape (its three squares average -1, 0, 1).
    pr.force.p_exact = [](const Vec2& z) { return z.x() + z.y(); };
    return pr;
  }
  throw ValidationError("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() { return {"smooth", "zero", "l_shape", "l_shape_constant"}; }

}  // namespace uzawa
