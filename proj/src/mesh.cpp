#include "uzawa/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace uzawa {

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

bool point_strictly_inside_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                   const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ap = p - a;
  const double cross = ab.x() * ap.y() - ab.y() * ap.x();
  if (std::abs(cross) > 1e-12 * ab.squaredNorm()) return false;
  const double t = ap.dot(ab) / ab.squaredNorm();
  return t > 1e-12 && t < 1.0 - 1e-12;
}

}  // namespace

MeshForest::MeshForest(std::vector<Eigen::Vector2d> vertices,
                       const std::vector<std::array<VertexId, 3>>& triangles)
    : vertices_(std::move(vertices)) {
  const auto nv = static_cast<VertexId>(vertices_.size());
  if (triangles.empty()) throw ValidationError("initial mesh has no elements");

  std::unordered_map<std::uint64_t, int> edge_count;
  elements_.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto v = triangles[t];
    for (VertexId id : v)
      if (id < 0 || id >= nv)
        throw ValidationError("element " + std::to_string(t) + ": vertex id out of range");
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw ValidationError("element " + std::to_string(t) + ": duplicate vertex ids");

    const auto& a = vertices_[v[0]];
    const auto& b = vertices_[v[1]];
    const auto& c = vertices_[v[2]];
    const double area = signed_area(a, b, c);
    const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    if (std::abs(area) <= 1e-14 * scale)
      throw ValidationError("element " + std::to_string(t) + ": degenerate triangle");
    if (area < 0) std::swap(v[1], v[2]);

    // Longest edge; ties broken by the smallest opposite-vertex id.
    int best = -1;
    double best_len = -1.0;
    for (int r = 0; r < 3; ++r) {
      const double len = (vertices_[v[(r + 1) % 3]] - vertices_[v[(r + 2) % 3]]).squaredNorm();
      if (len > best_len || (len == best_len && v[r] < v[best])) {
        best = r;
        best_len = len;
      }
    }

    Element e;
    e.v = v;
    e.refine_edge = best;
    elements_.push_back(e);
    for (int r = 0; r < 3; ++r) {
      const int cnt = ++edge_count[edge_key(v[r], v[(r + 1) % 3])];
      if (cnt > 2)
        throw ValidationError("element " + std::to_string(t) + ": edge shared by more than two elements");
    }
  }

  // Conformity: no vertex may lie in the interior of a boundary edge.
  for (std::size_t t = 0; t < elements_.size(); ++t) {
    const auto& v = elements_[t].v;
    for (int r = 0; r < 3; ++r) {
      const VertexId a = v[r], b = v[(r + 1) % 3];
      if (edge_count[edge_key(a, b)] != 1) continue;
      for (VertexId p = 0; p < nv; ++p) {
        if (p == a || p == b) continue;
        if (point_strictly_inside_segment(vertices_[p], vertices_[a], vertices_[b]))
          throw ValidationError("element " + std::to_string(t) + ": hanging node " + std::to_string(p) +
                                " on edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
      }
    }
  }
  rebuild_indices();
}

MeshForest::MeshForest(std::vector<Eigen::Vector2d> vertices, std::vector<Element> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  const auto ne = static_cast<ElementId>(elements_.size());
  for (ElementId id = 0; id < ne; ++id) {
    auto& e = elements_[id];
    e.children = {kNoElement, kNoElement};
    if (e.parent >= id) throw ValidationError("element " + std::to_string(id) + ": parent must precede child");
  }
  for (ElementId id = 0; id < ne; ++id) {
    const ElementId p = elements_[id].parent;
    if (p == kNoElement) continue;
    auto& ch = elements_[p].children;
    if (ch[0] == kNoElement)
      ch[0] = id;
    else if (ch[1] == kNoElement)
      ch[1] = id;
    else
      throw ValidationError("element " + std::to_string(p) + ": more than two children");
  }
  for (ElementId id = 0; id < ne; ++id)
    if (elements_[id].children[0] != kNoElement && elements_[id].children[1] == kNoElement)
      throw ValidationError("element " + std::to_string(id) + ": exactly one child");
  rebuild_indices();
}

void MeshForest::rebuild_indices() {
  roots_.clear();
  midpoints_.clear();
  boundary_edges_.clear();
  vertex_parent_.assign(vertices_.size(), {-1, -1});

  std::unordered_map<std::uint64_t, int> edge_count;
  for (ElementId id = 0; id < static_cast<ElementId>(elements_.size()); ++id) {
    const auto& e = elements_[id];
    if (e.parent != kNoElement) continue;
    roots_.push_back(id);
    for (int r = 0; r < 3; ++r) ++edge_count[edge_key(e.v[r], e.v[(r + 1) % 3])];
  }
  for (auto [key, cnt] : edge_count)
    if (cnt == 1) boundary_edges_.insert(key);

  // Parents always precede children, so boundary halves propagate in id order.
  for (const auto& e : elements_) {
    if (e.is_leaf()) continue;
    const auto [a, b] = e.refinement_edge();
    const auto& c0 = elements_[e.children[0]];
    VertexId m = -1;
    for (VertexId w : c0.v)
      if (w != e.v[0] && w != e.v[1] && w != e.v[2]) m = w;
    if (m < 0) throw ValidationError("bisection without a new vertex");
    midpoints_[edge_key(a, b)] = m;
    vertex_parent_[m] = {std::min(a, b), std::max(a, b)};
    if (boundary_edges_.contains(edge_key(a, b))) {
      boundary_edges_.insert(edge_key(a, m));
      boundary_edges_.insert(edge_key(m, b));
    }
  }
}

std::array<ElementId, 2> MeshForest::bisect(ElementId id) {
  if (!elements_[id].is_leaf()) return elements_[id].children;

  const Element parent = elements_[id];
  const VertexId z = parent.newest();
  const auto [a, b] = parent.refinement_edge();

  VertexId m = midpoint(a, b);
  if (m < 0) {
    m = static_cast<VertexId>(vertices_.size());
    // Midpoints of dyadic coordinates are exact in binary floating point.
    vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
    vertex_parent_.push_back({std::min(a, b), std::max(a, b)});
    midpoints_.emplace(edge_key(a, b), m);
    if (boundary_edges_.contains(edge_key(a, b))) {
      boundary_edges_.insert(edge_key(a, m));
      boundary_edges_.insert(edge_key(m, b));
    }
  }

  Element c0;
  c0.v = {z, a, m};
  c0.refine_edge = 2;
  Element c1;
  c1.v = {z, m, b};
  c1.refine_edge = 1;
  c0.parent = c1.parent = id;
  c0.generation = c1.generation = parent.generation + 1;

  const auto i0 = static_cast<ElementId>(elements_.size());
  elements_.push_back(c0);
  elements_.push_back(c1);
  elements_[id].children = {i0, i0 + 1};
  return {i0, i0 + 1};
}

VertexId MeshForest::midpoint(VertexId a, VertexId b) const {
  const auto it = midpoints_.find(edge_key(a, b));
  return it == midpoints_.end() ? VertexId{-1} : it->second;
}

double MeshForest::area(ElementId id) const {
  const auto& v = elements_[id].v;
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

ElementId MeshForest::root_of(ElementId id) const {
  while (elements_[id].parent != kNoElement) id = elements_[id].parent;
  return id;
}

bool MeshForest::descends_from(ElementId id, ElementId ancestor) const {
  while (id != kNoElement) {
    if (id == ancestor) return true;
    if (elements_[id].generation <= elements_[ancestor].generation) return false;
    id = elements_[id].parent;
  }
  return false;
}

bool Partition::contains(ElementId id) const { return std::binary_search(leaves.begin(), leaves.end(), id); }

Domain parse_domain(const std::string& name) {
  if (name == "unit_square") return Domain::UnitSquare;
  if (name == "l_shape") return Domain::LShape;
  throw ValidationError("unknown domain '" + name + "'");
}

std::string to_string(Domain d) { return d == Domain::UnitSquare ? "unit_square" : "l_shape"; }

Triangulation initial_triangulation(const std::shared_ptr<MeshForest>& forest) {
  Triangulation t;
  t.forest = forest;
  t.leaves.assign(forest->roots().begin(), forest->roots().end());
  std::sort(t.leaves.begin(), t.leaves.end());
  t.conforming = true;
  return t;
}

Triangulation initial_mesh(std::vector<Eigen::Vector2d> vertices,
                           const std::vector<std::array<VertexId, 3>>& triangles) {
  return initial_triangulation(std::make_shared<MeshForest>(std::move(vertices), triangles));
}

Triangulation initial_mesh(Domain domain) {
  if (domain == Domain::UnitSquare) {
    return initial_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
  }
  // (-1,1)^2 minus [0,1]x[-1,0]: three unit squares, diagonals through the re-entrant corner.
  return initial_mesh({{-1, -1}, {0, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}},
                      {{0, 1, 3}, {0, 3, 2}, {2, 3, 5}, {3, 6, 5}, {3, 4, 7}, {3, 7, 6}});
}

namespace {

std::vector<char> used_vertices(const Partition& p) {
  std::vector<char> used(p.forest->num_vertices(), 0);
  for (ElementId id : p.leaves)
    for (VertexId v : p.forest->element(id).v) used[v] = 1;
  return used;
}

}  // namespace

bool has_hanging_nodes(const Partition& p) {
  const auto& f = *p.forest;
  const auto used = used_vertices(p);
  for (ElementId id : p.leaves) {
    const auto& v = f.element(id).v;
    for (int r = 0; r < 3; ++r) {
      const VertexId m = f.midpoint(v[r], v[(r + 1) % 3]);
      if (m >= 0 && used[m]) return true;
    }
  }
  return false;
}

Partition bisect_partition(const Partition& p, std::span<const ElementId> marked) {
  if (marked.empty()) return p;
  std::vector<ElementId> m(marked.begin(), marked.end());
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  for (ElementId id : m)
    if (!p.contains(id))
      throw ContractViolation("bisect_partition: element " + std::to_string(id) + " is not a leaf of the partition");

  Partition out;
  out.forest = p.forest;
  out.leaves.reserve(p.size() + m.size());
  std::set_difference(p.leaves.begin(), p.leaves.end(), m.begin(), m.end(), std::back_inserter(out.leaves));
  for (ElementId id : m) {
    const auto ch = p.forest->bisect(id);
    out.leaves.push_back(ch[0]);
    out.leaves.push_back(ch[1]);
  }
  std::sort(out.leaves.begin(), out.leaves.end());
  out.conforming = !has_hanging_nodes(out);
  return out;
}

Triangulation close(const Partition& p) {
  if (p.conforming) return p;
  auto& f = *p.forest;

  std::vector<char> is_leaf(f.num_elements(), 0);
  std::vector<int> vuse(f.num_vertices(), 0);
  std::unordered_map<std::uint64_t, std::array<ElementId, 2>> edge_owner;
  edge_owner.reserve(p.size() * 2);

  auto add_leaf = [&](ElementId id) {
    if (static_cast<std::size_t>(id) >= is_leaf.size()) is_leaf.resize(f.num_elements(), 0);
    is_leaf[id] = 1;
    const auto& v = f.element(id).v;
    for (int r = 0; r < 3; ++r) {
      if (static_cast<std::size_t>(v[r]) >= vuse.size()) vuse.resize(f.num_vertices(), 0);
      ++vuse[v[r]];
      auto [it, inserted] = edge_owner.try_emplace(edge_key(v[r], v[(r + 1) % 3]),
                                                   std::array<ElementId, 2>{kNoElement, kNoElement});
      auto& own = it->second;
      (own[0] == kNoElement ? own[0] : own[1]) = id;
    }
  };
  auto remove_leaf = [&](ElementId id) {
    is_leaf[id] = 0;
    const auto& v = f.element(id).v;
    for (int r = 0; r < 3; ++r) {
      --vuse[v[r]];
      auto it = edge_owner.find(edge_key(v[r], v[(r + 1) % 3]));
      auto& own = it->second;
      if (own[0] == id) own[0] = own[1];
      own[1] = kNoElement;
      if (own[0] == kNoElement) edge_owner.erase(it);
    }
  };
  auto hanging = [&](ElementId id) {
    const auto& v = f.element(id).v;
    for (int r = 0; r < 3; ++r) {
      const VertexId m = f.midpoint(v[r], v[(r + 1) % 3]);
      if (m >= 0 && static_cast<std::size_t>(m) < vuse.size() && vuse[m] > 0) return true;
    }
    return false;
  };

  for (ElementId id : p.leaves) add_leaf(id);
  std::deque<ElementId> work(p.leaves.begin(), p.leaves.end());
  while (!work.empty()) {
    const ElementId id = work.front();
    work.pop_front();
    if (!is_leaf[id] || !hanging(id)) continue;
    const auto [a, b] = f.element(id).refinement_edge();
    remove_leaf(id);
    const auto ch = f.bisect(id);
    add_leaf(ch[0]);
    add_leaf(ch[1]);
    work.push_back(ch[0]);
    work.push_back(ch[1]);
    if (auto it = edge_owner.find(edge_key(a, b)); it != edge_owner.end())
      for (ElementId nb : it->second)
        if (nb != kNoElement) work.push_back(nb);
  }

  Triangulation out;
  out.forest = p.forest;
  for (ElementId id = 0; id < static_cast<ElementId>(is_leaf.size()); ++id)
    if (is_leaf[id]) out.leaves.push_back(id);
  out.conforming = true;
  return out;
}

Triangulation refine_conforming(const Triangulation& t, std::span<const ElementId> marked) {
  if (!t.conforming) throw ContractViolation("refine_conforming: input is not conforming");
  return close(bisect_partition(t, marked));
}

Triangulation refine_uniform(const Triangulation& t, int levels) {
  Triangulation out = t;
  for (int l = 0; l < levels; ++l) {
    const auto all = out.leaves;
    out = refine_conforming(out, all);
  }
  return out;
}

Partition overlay(const Partition& a, const Partition& b) {
  if (a.forest != b.forest) throw ContractViolation("overlay: partitions belong to different forests");
  const auto& f = *a.forest;
  std::vector<char> in_tree(f.num_elements(), 0);
  auto mark = [&](const Partition& p) {
    for (ElementId id : p.leaves)
      for (ElementId e = id; e != kNoElement && !in_tree[e]; e = f.element(e).parent) in_tree[e] = 1;
  };
  mark(a);
  mark(b);

  Partition out;
  out.forest = a.forest;
  for (ElementId id = 0; id < static_cast<ElementId>(in_tree.size()); ++id) {
    if (!in_tree[id]) continue;
    const auto& e = f.element(id);
    if (e.is_leaf() || !in_tree[e.children[0]]) out.leaves.push_back(id);
  }
  out.conforming = (a.conforming && b.conforming) || !has_hanging_nodes(out);
  return out;
}

std::vector<int> ancestor_index(const Partition& fine, const Partition& coarse) {
  if (fine.forest != coarse.forest) throw ContractViolation("partitions belong to different forests");
  const auto& f = *fine.forest;
  std::vector<int> idx(f.num_elements(), -1);
  for (std::size_t i = 0; i < coarse.leaves.size(); ++i) idx[coarse.leaves[i]] = static_cast<int>(i);
  std::vector<int> out(fine.size());
  for (std::size_t i = 0; i < fine.leaves.size(); ++i) {
    ElementId e = fine.leaves[i];
    while (e != kNoElement && idx[e] < 0) e = f.element(e).parent;
    if (e == kNoElement)
      throw ContractViolation("element " + std::to_string(fine.leaves[i]) + " does not refine the coarse partition");
    out[i] = idx[e];
  }
  return out;
}

bool is_refinement_of(const Partition& fine, const Partition& coarse) {
  try {
    ancestor_index(fine, coarse);
    return true;
  } catch (const ContractViolation&) {
    return false;
  }
}

std::vector<int> descendant_counts(const Partition& fine, const Partition& coarse) {
  std::vector<int> counts(coarse.size(), 0);
  for (int i : ancestor_index(fine, coarse)) ++counts[i];
  return counts;
}

double audit_closure_estimate(std::size_t initial_elements, std::span<const ClosureStep> history) {
  if (history.empty()) throw ContractViolation("audit_closure_estimate: empty history");
  double worst = 0.0;
  std::size_t marked_total = 0;
  for (const auto& step : history) {
    marked_total += step.marked;
    const double added = static_cast<double>(step.elements_after) - static_cast<double>(initial_elements);
    if (marked_total == 0) continue;  // 0/0 := 0
    worst = std::max(worst, added / static_cast<double>(marked_total));
  }
  return worst;
}

double min_angle(const Partition& p) {
  const auto& f = *p.forest;
  double worst = M_PI;
  for (ElementId id : p.leaves) {
    const auto& v = f.element(id).v;
    for (int r = 0; r < 3; ++r) {
      const Eigen::Vector2d e1 = f.vertex(v[(r + 1) % 3]) - f.vertex(v[r]);
      const Eigen::Vector2d e2 = f.vertex(v[(r + 2) % 3]) - f.vertex(v[r]);
      const double c = std::clamp(e1.dot(e2) / (e1.norm() * e2.norm()), -1.0, 1.0);
      worst = std::min(worst, std::acos(c));
    }
  }
  return worst;
}

std::size_t similarity_classes(const MeshForest& forest, double rel_tol) {
  std::set<std::pair<long long, long long>> classes;
  for (ElementId id = 0; id < static_cast<ElementId>(forest.num_elements()); ++id) {
    const auto& v = forest.element(id).v;
    std::array<double, 3> len{};
    for (int r = 0; r < 3; ++r) len[r] = (forest.vertex(v[(r + 1) % 3]) - forest.vertex(v[r])).norm();
    std::sort(len.begin(), len.end());
    classes.emplace(std::llround(len[0] / len[2] / rel_tol), std::llround(len[1] / len[2] / rel_tol));
  }
  return classes.size();
}

}  // namespace uzawa
