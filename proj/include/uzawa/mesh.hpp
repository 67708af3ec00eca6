#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace uzawa {

using ElementId = std::int32_t;
using VertexId = std::int32_t;
inline constexpr ElementId kNoElement = -1;

/// Thrown when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Thrown for malformed user input (custom meshes, config files, mesh files).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Undirected edge key, independent of vertex order.
inline std::uint64_t edge_key(VertexId a, VertexId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// One triangle of the NVB forest.
///
/// Vertices are stored counter-clockwise. The refinement edge is the edge
/// opposite `v[refine_edge]`, i.e. `v[refine_edge]` is the newest vertex.
struct Element {
  std::array<VertexId, 3> v{};
  int refine_edge = 0;
  ElementId parent = kNoElement;
  std::array<ElementId, 2> children{kNoElement, kNoElement};
  int generation = 0;

  bool is_leaf() const { return children[0] == kNoElement; }
  VertexId newest() const { return v[refine_edge]; }
  /// Endpoints of the refinement edge, in counter-clockwise order after newest().
  std::array<VertexId, 2> refinement_edge() const {
    return {v[(refine_edge + 1) % 3], v[(refine_edge + 2) % 3]};
  }
};

/// Binary forest of newest-vertex bisections in 2D.
///
/// Elements and vertices are append-only: ids are stable and never reused.
/// Midpoint vertices are keyed by the edge they bisect, so a vertex shared
/// by two bisections is created exactly once.
class MeshForest {
public:
  /// Builds the roots from a conforming triangulation. Vertex order of each
  /// element is normalized to counter-clockwise; the refinement edge is the
  /// longest edge, ties broken by the smallest opposite-vertex id.
  MeshForest(std::vector<Eigen::Vector2d> vertices,
             const std::vector<std::array<VertexId, 3>>& triangles);

  /// Raw constructor used by deserialization; elements are taken verbatim.
  MeshForest(std::vector<Eigen::Vector2d> vertices, std::vector<Element> elements);

  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_vertices() const { return vertices_.size(); }
  const Element& element(ElementId id) const { return elements_[static_cast<std::size_t>(id)]; }
  const Eigen::Vector2d& vertex(VertexId id) const { return vertices_[static_cast<std::size_t>(id)]; }
  std::span<const ElementId> roots() const { return roots_; }
  std::span<const Element> elements() const { return elements_; }
  std::span<const Eigen::Vector2d> vertices() const { return vertices_; }

  /// Children of `id`, created on first request.
  std::array<ElementId, 2> bisect(ElementId id);

  /// Midpoint vertex of edge (a,b) if that edge has ever been bisected.
  VertexId midpoint(VertexId a, VertexId b) const;
  /// The edge (a,b) that vertex `m` bisects, or {-1,-1} for initial vertices.
  std::array<VertexId, 2> parent_edge(VertexId m) const { return vertex_parent_[static_cast<std::size_t>(m)]; }

  bool is_boundary_edge(VertexId a, VertexId b) const { return boundary_edges_.contains(edge_key(a, b)); }

  double area(ElementId id) const;
  /// Root of the tree containing `id`.
  ElementId root_of(ElementId id) const;
  /// True if `ancestor` is `id` or one of its ancestors.
  bool descends_from(ElementId id, ElementId ancestor) const;

private:
  void rebuild_indices();

  std::vector<Eigen::Vector2d> vertices_;
  std::vector<Element> elements_;
  std::vector<ElementId> roots_;
  std::vector<std::array<VertexId, 2>> vertex_parent_;
  std::unordered_map<std::uint64_t, VertexId> midpoints_;
  std::unordered_set<std::uint64_t> boundary_edges_;
};

/// A leaf-set view of a forest: a (possibly non-conforming) partition, or a
/// conforming triangulation when `conforming` is set. Leaves are sorted by id.
struct Partition {
  std::shared_ptr<MeshForest> forest;
  std::vector<ElementId> leaves;
  bool conforming = false;

  std::size_t size() const { return leaves.size(); }
  MeshForest& mesh() const { return *forest; }
  bool contains(ElementId id) const;
};

/// Conforming leaf sets get their own name at call sites; the type is shared.
using Triangulation = Partition;

enum class Domain { UnitSquare, LShape };

Domain parse_domain(const std::string& name);
std::string to_string(Domain d);

/// Initial triangulation of a library domain; the returned triangulation is the forest roots.
Triangulation initial_mesh(Domain domain);
/// Initial triangulation from user data; validated for degeneracy and conformity.
Triangulation initial_mesh(std::vector<Eigen::Vector2d> vertices,
                           const std::vector<std::array<VertexId, 3>>& triangles);

/// One bisection of every marked leaf, without closure.
Partition bisect_partition(const Partition& p, std::span<const ElementId> marked);
/// Coarsest conforming refinement.
Triangulation close(const Partition& p);
/// close(bisect_partition(t, marked)).
Triangulation refine_conforming(const Triangulation& t, std::span<const ElementId> marked);
/// Uniform refinement: every leaf marked, `levels` times.
Triangulation refine_uniform(const Triangulation& t, int levels = 1);
/// Coarsest common refinement of two partitions of the same forest.
Partition overlay(const Partition& a, const Partition& b);

/// True if every leaf of `fine` descends from a leaf of `coarse`.
bool is_refinement_of(const Partition& fine, const Partition& coarse);
/// For each leaf of `fine`, the index (into coarse.leaves) of its ancestor leaf.
/// Throws ContractViolation if `fine` does not refine `coarse`.
std::vector<int> ancestor_index(const Partition& fine, const Partition& coarse);
/// Hanging-node check. Cost is linear in the number of leaves.
bool has_hanging_nodes(const Partition& p);
/// The forest roots as a triangulation.
Triangulation initial_triangulation(const std::shared_ptr<MeshForest>& forest);

/// Count of leaves of `fine` below each leaf of `coarse`.
std::vector<int> descendant_counts(const Partition& fine, const Partition& coarse);

struct ClosureStep {
  std::size_t elements_after = 0;  ///< #T_{j+1}
  std::size_t marked = 0;          ///< #M_j
};
/// max_J (#T_J - #T_init) / sum_{j<J} #M_j with 0/0 := 0.
double audit_closure_estimate(std::size_t initial_elements, std::span<const ClosureStep> history);

/// Smallest interior angle (radians) over the given leaves.
double min_angle(const Partition& p);
/// Number of similarity classes among the elements of the forest (up to
/// rotation, reflection and scaling), using a relative tolerance on the
/// sorted side ratios.
std::size_t similarity_classes(const MeshForest& forest, double rel_tol = 1e-9);

}  // namespace uzawa
