#include "uzawa/tree_approx.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace uzawa {

namespace {

struct Moments {
  double a = 0, s1 = 0, s2 = 0;  // area, int div, int div^2
  bool present = false;
  bool velocity_leaf = false;

  double error() const {
    if (!present || velocity_leaf) return 0.0;
    return std::max(0.0, s2 - s1 * s1 / a);
  }
  double projected() const { return present ? s1 * s1 / a : 0.0; }
};

// Moments of div V on every forest node between a velocity leaf and its
// ancestor leaf in p (both inclusive).
std::vector<Moments> tree_moments(const Partition& p, const VelocityField& v, double& div_sq) {
  const auto& sp = *v.space;
  const auto& f = *p.forest;
  if (sp.tri.forest != p.forest) throw ContractViolation("velocity and partition use different forests");
  const auto owner = ancestor_index(sp.tri, p);
  std::vector<Moments> m(f.num_elements());
  div_sq = 0.0;
  for (std::size_t e = 0; e < sp.num_elements(); ++e) {
    const double d = v.divergence(static_cast<int>(e));
    const double a = sp.area[e];
    div_sq += a * d * d;
    const ElementId stop = p.leaves[static_cast<std::size_t>(owner[e])];
    ElementId id = sp.tri.leaves[e];
    m[static_cast<std::size_t>(id)].velocity_leaf = true;
    while (true) {
      auto& mm = m[static_cast<std::size_t>(id)];
      mm.present = true;
      mm.a += a;
      mm.s1 += a * d;
      mm.s2 += a * d * d;
      if (id == stop) break;
      id = f.element(id).parent;
    }
  }
  // Use exact element areas on nodes so that constant divergence gives s2 == s1^2/a up to rounding.
  for (std::size_t id = 0; id < m.size(); ++id)
    if (m[id].present) m[id].a = f.area(static_cast<ElementId>(id));
  return m;
}

double exact_projection_sq(const Partition& p, const VelocityField& v) {
  const double n = l2_norm(l2_project_div(p, v));
  return n * n;
}

}  // namespace

double local_best_error(ElementId elem, const VelocityField& v) {
  const auto& sp = *v.space;
  const auto& f = *sp.tri.forest;
  if (elem < 0 || static_cast<std::size_t>(elem) >= f.num_elements()) throw ContractViolation("unknown element");
  double a = 0, s1 = 0, s2 = 0;
  for (std::size_t e = 0; e < sp.num_elements(); ++e) {
    const ElementId leaf = sp.tri.leaves[e];
    if (f.descends_from(elem, leaf)) return 0.0;  // elem lies inside one velocity element
    if (!f.descends_from(leaf, elem)) continue;
    const double d = v.divergence(static_cast<int>(e));
    a += sp.area[e];
    s1 += sp.area[e] * d;
    s2 += sp.area[e] * d * d;
  }
  const double area = f.area(elem);
  if (std::abs(a - area) > 1e-12 * area)
    throw ContractViolation("velocity triangulation does not refine the element");
  return std::max(0.0, s2 - s1 * s1 / area);
}

BinevResult binev(const Partition& p, const VelocityField& v, double vartheta, bool record_trace) {
  if (!(vartheta > 0.0 && vartheta <= 1.0)) throw ContractViolation("vartheta must lie in (0, 1]");
  double div_sq = 0.0;
  const auto m = tree_moments(p, v, div_sq);
  const auto& f = *p.forest;
  const double lhs = vartheta * std::sqrt(div_sq);

  std::vector<double> etilde(m.size(), 0.0);
  std::set<ElementId> leaves(p.leaves.begin(), p.leaves.end());
  using Entry = std::pair<double, ElementId>;
  auto cmp = [](const Entry& x, const Entry& y) {
    return x.first != y.first ? x.first < y.first : x.second > y.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  double proj_sq = 0.0;
  for (ElementId id : p.leaves) {
    const auto& mm = m[static_cast<std::size_t>(id)];
    etilde[static_cast<std::size_t>(id)] = mm.error();
    heap.emplace(mm.error(), id);
    proj_sq += mm.projected();
  }

  BinevResult out;
  const auto current = [&] {
    Partition q;
    q.forest = p.forest;
    q.leaves.assign(leaves.begin(), leaves.end());
    return q;
  };
  while (true) {
    if (binev_criterion(lhs, std::sqrt(std::max(0.0, proj_sq)))) {
      // The running sum drifts; confirm on the actual partition before returning.
      proj_sq = exact_projection_sq(current(), v);
      if (binev_criterion(lhs, std::sqrt(proj_sq))) break;
    }
    if (heap.empty() || heap.top().first <= 0.0) {
      std::ostringstream msg;
      msg << "binev: criterion " << lhs << " <= " << std::sqrt(proj_sq) << " fails with all modified errors zero ("
          << leaves.size() << " leaves, " << out.bisections << " bisections)";
      throw std::logic_error(msg.str());
    }
    const auto [et, id] = heap.top();
    heap.pop();
    const auto& mx = m[static_cast<std::size_t>(id)];
    if (record_trace)
      out.trace.push_back({out.bisections + 1, id, mx.error(), et, lhs, std::sqrt(std::max(0.0, proj_sq))});
    const auto& el = f.element(id);
    if (el.is_leaf()) throw std::logic_error("binev: selected element has no children in the forest");
    leaves.erase(id);
    proj_sq -= mx.projected();
    for (ElementId c : el.children) {
      const auto& mc = m[static_cast<std::size_t>(c)];
      const double ec = mc.error();
      const double denom = ec + et;
      const double t = denom > 0.0 ? ec * et / denom : 0.0;
      etilde[static_cast<std::size_t>(c)] = t;
      heap.emplace(t, c);
      leaves.insert(c);
      proj_sq += mc.projected();
    }
    ++out.bisections;
  }
  out.partition = current();
  out.partition.conforming = !has_hanging_nodes(out.partition);
  out.crit_lhs = lhs;
  out.crit_rhs = std::sqrt(proj_sq);
  return out;
}

void write_binev_trace(std::ostream& os, const std::vector<BinevTraceRow>& trace) {
  os << "step,elem_id,e,etilde,crit_lhs,crit_rhs\n";
  for (const auto& r : trace)
    os << r.step << ',' << r.elem << ',' << r.e << ',' << r.etilde << ',' << r.crit_lhs << ',' << r.crit_rhs << '\n';
}

QuasiOptimalityReport quasi_optimality_audit(const Partition& p, const VelocityField& v, double vartheta,
                                             double vartheta_prime, int budget) {
  if (budget < 0 || budget > 10) throw ContractViolation("audit budget must lie in [0, 10]");
  if (!(vartheta < vartheta_prime && vartheta_prime < 1.0)) throw ContractViolation("need vartheta < vartheta' < 1");
  QuasiOptimalityReport rep;
  rep.greedy_bisections = binev(p, v, vartheta).bisections;

  double div_sq = 0.0;
  const auto m = tree_moments(p, v, div_sq);
  const auto& f = *p.forest;
  const double lhs = vartheta_prime * std::sqrt(div_sq);
  // Bisecting an element on which div V is constant never helps, nor does any bisection below it.
  const auto useful = [&](ElementId id) {
    const auto& mm = m[static_cast<std::size_t>(id)];
    return mm.error() > 1e-12 * mm.s2 && !f.element(id).is_leaf();
  };
  const auto feasible = [&](const std::vector<ElementId>& leaves) {
    double s = 0.0;
    for (ElementId id : leaves) s += m[static_cast<std::size_t>(id)].projected();
    return binev_criterion(lhs, std::sqrt(std::max(0.0, s)));
  };

  constexpr std::size_t kStateCap = 2'000'000;
  std::set<std::vector<ElementId>> seen;
  std::vector<std::vector<ElementId>> level{p.leaves};
  seen.insert(p.leaves);
  for (int depth = 0; depth <= budget && !level.empty(); ++depth) {
    rep.states_explored += level.size();
    if (std::any_of(level.begin(), level.end(), feasible)) {
      rep.comparator_found = true;
      rep.min_bisections = depth;
      break;
    }
    if (depth == budget) break;
    std::vector<std::vector<ElementId>> next;
    for (const auto& s : level) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!useful(s[i])) continue;
        std::vector<ElementId> t = s;
        t.erase(t.begin() + static_cast<std::ptrdiff_t>(i));
        const auto ch = f.element(s[i]).children;
        t.insert(std::lower_bound(t.begin(), t.end(), ch[0]), ch[0]);
        t.insert(std::lower_bound(t.begin(), t.end(), ch[1]), ch[1]);
        if (seen.insert(t).second) next.push_back(std::move(t));
      }
      if (seen.size() > kStateCap) {
        rep.state_cap_hit = true;
        break;
      }
    }
    if (rep.state_cap_hit) break;
    level = std::move(next);
  }
  if (rep.comparator_found) {
    if (rep.min_bisections == 0)
      rep.c_bin = rep.greedy_bisections == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    else
      rep.c_bin = static_cast<double>(rep.greedy_bisections) / rep.min_bisections;
  }
  return rep;
}

}  // namespace uzawa
