#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include "uzawa/fem.hpp"

namespace uzawa {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
/// Strict parse of a full string; throws ValidationError.
double parse_double(const std::string& s);

/// A forest with named leaf-set views and fields attached to them.
struct MeshBundle {
  std::shared_ptr<MeshForest> forest;
  std::map<std::string, Partition> views;
  std::map<std::string, PressureField> pressures;  ///< keyed by view name
  std::map<std::string, VelocityField> velocities;
};

/// Plain-text format: "nvb-mesh v1", "v x y" lines, "e v0 v1 v2 refedge parent gen"
/// lines, then "view <name> <conforming> <count>" followed by the leaf ids on one
/// line, "pfield <view> deg 0" followed by "<elem_id> c0" lines, and
/// "vfield <view> deg 1" followed by "<vertex_id> ux uy" lines for free vertices.
void write_mesh(std::ostream& os, const MeshBundle& b);
MeshBundle read_mesh(std::istream& is);

}  // namespace uzawa
