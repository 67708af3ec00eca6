#pragma once

#include <string>
#include <vector>

#include "uzawa/fem.hpp"
#include "uzawa/mesh.hpp"

namespace uzawa {

/// A named test problem: domain plus body force.
struct Problem {
  std::string name;
  Domain domain = Domain::UnitSquare;
  BodyForce force;
};

/// Known problems:
///  - "smooth": unit square, u = curl(x^2(1-x)^2 y^2(1-y)^2), p = x^3 + y^3 - 1/2.
///  - "zero": unit square, f = 0.
///  - "l_shape": L-shape, rotational forcing f = (-y, x); corner-singular solution.
///  - "l_shape_constant": L-shape, f = (1, 1). A gradient, so u = 0 and p = x + y - mean.
Problem make_problem(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace uzawa
