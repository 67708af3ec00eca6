#include "uzawa/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace uzawa {

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) {
    // from_chars rejects "inf"/"nan" spellings produced by some writers.
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw ValidationError("not a number: '" + s + "'");
  }
  return x;
}

void write_mesh(std::ostream& os, const MeshBundle& b) {
  const auto& f = *b.forest;
  os << "nvb-mesh v1\n";
  for (const auto& v : f.vertices()) os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
  for (const auto& e : f.elements())
    os << "e " << e.v[0] << ' ' << e.v[1] << ' ' << e.v[2] << ' ' << e.refine_edge << ' ' << e.parent << ' '
       << e.generation << '\n';
  for (const auto& [name, p] : b.views) {
    if (p.forest != b.forest) throw ContractViolation("view '" + name + "' belongs to another forest");
    os << "view " << name << ' ' << (p.conforming ? 1 : 0) << ' ' << p.size() << '\n';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << p.leaves[i];
    os << '\n';
  }
  for (const auto& [name, q] : b.pressures) {
    if (!b.views.contains(name)) throw ContractViolation("pressure field on unknown view '" + name + "'");
    os << "pfield " << name << " deg " << q.degree << '\n';
    for (std::size_t i = 0; i < q.partition.size(); ++i)
      os << q.partition.leaves[i] << ' ' << format_double(q.coeffs[static_cast<Eigen::Index>(i)]) << '\n';
  }
  for (const auto& [name, u] : b.velocities) {
    if (!b.views.contains(name)) throw ContractViolation("velocity field on unknown view '" + name + "'");
    os << "vfield " << name << " deg " << u.degree << '\n';
    for (std::size_t w = 0; w < u.space->vertex_dof.size(); ++w) {
      const int d = u.space->vertex_dof[w];
      if (d < 0) continue;
      os << w << ' ' << format_double(u.values(d, 0)) << ' ' << format_double(u.values(d, 1)) << '\n';
    }
  }
}

namespace {

struct Reader {
  std::istream& is;
  int lineno = 0;
  std::string line;

  bool next() {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty()) return true;
    }
    return false;
  }
  [[noreturn]] void error(const std::string& what) const {
    throw ValidationError("mesh file line " + std::to_string(lineno) + ": " + what);
  }
  std::vector<std::string> tokens() const {
    std::istringstream ss(line);
    std::vector<std::string> t;
    for (std::string s; ss >> s;) t.push_back(s);
    return t;
  }
  long integer(const std::string& s) const {
    long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) error("expected an integer, got '" + s + "'");
    return v;
  }
  double real(const std::string& s) const {
    try {
      return parse_double(s);
    } catch (const ValidationError&) {
      error("expected a number, got '" + s + "'");
    }
  }
};

}  // namespace

MeshBundle read_mesh(std::istream& is) {
  Reader r{is};
  if (!r.next() || r.line != "nvb-mesh v1") r.error("missing 'nvb-mesh v1' header");
  std::vector<Eigen::Vector2d> verts;
  std::vector<Element> elems;
  MeshBundle b;
  bool more = r.next();
  while (more) {
    const auto t = r.tokens();
    if (t[0] == "v") {
      if (t.size() != 3) r.error("vertex line needs 2 coordinates");
      verts.emplace_back(r.real(t[1]), r.real(t[2]));
    } else if (t[0] == "e") {
      if (t.size() != 7) r.error("element line needs 6 fields");
      Element e;
      for (int k = 0; k < 3; ++k) {
        const long v = r.integer(t[static_cast<std::size_t>(k + 1)]);
        if (v < 0 || static_cast<std::size_t>(v) >= verts.size()) r.error("vertex id out of range");
        e.v[static_cast<std::size_t>(k)] = static_cast<VertexId>(v);
      }
      e.refine_edge = static_cast<int>(r.integer(t[4]));
      if (e.refine_edge < 0 || e.refine_edge > 2) r.error("refinement edge must be 0, 1 or 2");
      e.parent = static_cast<ElementId>(r.integer(t[5]));
      e.generation = static_cast<int>(r.integer(t[6]));
      elems.push_back(e);
    } else {
      break;
    }
    more = r.next();
  }
  b.forest = std::make_shared<MeshForest>(std::move(verts), std::move(elems));
  const auto& f = *b.forest;

  while (more) {
    const auto t = r.tokens();
    if (t[0] == "view") {
      if (t.size() != 4) r.error("view line needs name, conforming flag and count");
      Partition p;
      p.forest = b.forest;
      p.conforming = r.integer(t[2]) != 0;
      const long count = r.integer(t[3]);
      if (!r.next()) r.error("missing leaf ids");
      for (const auto& s : r.tokens()) {
        const long id = r.integer(s);
        if (id < 0 || static_cast<std::size_t>(id) >= f.num_elements()) r.error("element id out of range");
        p.leaves.push_back(static_cast<ElementId>(id));
      }
      if (static_cast<long>(p.leaves.size()) != count) r.error("leaf count mismatch");
      if (!std::is_sorted(p.leaves.begin(), p.leaves.end())) r.error("leaf ids must be sorted");
      b.views[t[1]] = std::move(p);
      more = r.next();
    } else if (t[0] == "pfield" || t[0] == "vfield") {
      if (t.size() != 4 || t[2] != "deg") r.error("field header must read '<kind> <view> deg <k>'");
      const auto it = b.views.find(t[1]);
      if (it == b.views.end()) r.error("field refers to unknown view '" + t[1] + "'");
      const long deg = r.integer(t[3]);
      const bool pressure = t[0] == "pfield";
      if (pressure && deg != 0) r.error("only degree 0 pressures are supported");
      if (!pressure && deg != 1) r.error("only degree 1 velocities are supported");
      PressureField q = zero_pressure(it->second);
      std::optional<VelocityField> u;
      if (!pressure) u = zero_velocity(make_velocity_space(it->second));
      while ((more = r.next())) {
        const auto row = r.tokens();
        if (row[0] == "view" || row[0] == "pfield" || row[0] == "vfield") break;
        if (pressure) {
          if (row.size() != 2) r.error("pressure line needs element id and coefficient");
          const auto pos = std::lower_bound(q.partition.leaves.begin(), q.partition.leaves.end(),
                                            static_cast<ElementId>(r.integer(row[0])));
          if (pos == q.partition.leaves.end() || *pos != r.integer(row[0])) r.error("element is not a leaf of the view");
          q.coeffs[pos - q.partition.leaves.begin()] = r.real(row[1]);
        } else {
          if (row.size() != 3) r.error("velocity line needs vertex id and two components");
          const int d = u->space->dof(static_cast<VertexId>(r.integer(row[0])));
          if (d < 0) r.error("vertex is not a free node of the view");
          u->values(d, 0) = r.real(row[1]);
          u->values(d, 1) = r.real(row[2]);
        }
      }
      if (pressure)
        b.pressures[t[1]] = std::move(q);
      else
        b.velocities[t[1]] = std::move(*u);
    } else {
      r.error("unexpected record '" + t[0] + "'");
    }
  }
  return b;
}

}  // namespace uzawa
