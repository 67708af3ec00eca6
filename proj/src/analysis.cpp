#include "uzawa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "uzawa/estimator.hpp"
#include "uzawa/poisson.hpp"
#include "uzawa/quadrature.hpp"

namespace uzawa {

RateFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("power-law fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw std::invalid_argument("power-law fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0) throw std::invalid_argument("power-law fit needs distinct abscissae");
  RateFit f;
  const double slope = (n * sxy - sx * sy) / den;
  f.s = -slope;
  f.intercept = (sy - slope * sx) / n;
  double res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(y[i]) - (f.intercept + slope * std::log(x[i]));
    res += r * r;
    f.sup_statistic = std::max(f.sup_statistic, y[i] * std::pow(x[i], f.s));
  }
  f.residual = std::sqrt(res);
  f.x.assign(x.begin(), x.end());
  f.y.assign(y.begin(), y.end());
  return f;
}

void mesh_change_points(const RunLog& log, std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  const auto& r = log.records;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const bool last_on_mesh = i + 1 == r.size() || r[i + 1].triangulation_size != r[i].triangulation_size;
    if (!last_on_mesh) continue;
    x.push_back(static_cast<double>(r[i].triangulation_size) - static_cast<double>(log.initial_elements) + 1.0);
    y.push_back(r[i].mu);
  }
}

RateFit fit_rate(const RunLog& log, double window) {
  if (!(window > 0 && window <= 1)) throw std::invalid_argument("window must lie in (0, 1]");
  std::vector<double> x, y;
  mesh_change_points(log, x, y);
  if (x.size() < 20) throw std::invalid_argument("rate fit needs at least 20 mesh-changing records, got " + std::to_string(x.size()));
  const auto keep = static_cast<std::size_t>(std::ceil(window * static_cast<double>(x.size())));
  if (keep < 10) throw std::invalid_argument("rate-fit window holds fewer than 10 points");
  const std::size_t first = x.size() - keep;
  return fit_power_law(std::span(x).subspan(first), std::span(y).subspan(first));
}

LinearConvergenceFit fit_linear_convergence(std::span<const double> mu, int min_gap) {
  if (min_gap < 1) throw std::invalid_argument("min_gap must be positive");
  LinearConvergenceFit f;
  if (std::all_of(mu.begin(), mu.end(), [](double v) { return v == 0.0; })) return f;
  const std::size_t positive = static_cast<std::size_t>(std::count_if(mu.begin(), mu.end(), [](double v) { return v > 0; }));
  if (positive < 2 * static_cast<std::size_t>(min_gap))
    throw std::invalid_argument("linear-convergence fit needs at least 2 * min_gap positive values");
  const std::size_t n = mu.size();
  double q = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (mu[a] <= 0) continue;
    for (std::size_t b = a + static_cast<std::size_t>(min_gap); b < n; ++b)
      q = std::max(q, std::pow(mu[b] / mu[a], 1.0 / static_cast<double>(b - a)));
  }
  double c = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (mu[a] <= 0) continue;
    for (std::size_t b = a; b < n; ++b) {
      const double scale = q > 0 ? std::pow(q, static_cast<double>(b - a)) : (b == a ? 1.0 : 0.0);
      if (scale > 0) c = std::max(c, mu[b] / (scale * mu[a]));
    }
  }
  f.q_hat = q;
  f.c_hat = c;
  f.contractive = q < 1.0;
  return f;
}

LinearConvergenceFit fit_linear_convergence(const RunLog& log, int min_gap) {
  std::vector<double> mu;
  for (const auto& r : log.records) mu.push_back(r.mu);
  return fit_linear_convergence(mu, min_gap);
}

namespace {
double tail_ratio(std::span<const double> a) {
  double best = 0.0, tail = 0.0;
  for (std::size_t l = a.size(); l-- > 0;) {
    tail += a[l];
    if (a[l] > 0) best = std::max(best, tail / a[l]);
  }
  return best;
}
}  // namespace

SummabilityReport summability_diagnostic(std::span<const double> a) {
  SummabilityReport r;
  if (std::any_of(a.begin(), a.end(), [](double v) { return v < 0; }))
    throw std::invalid_argument("summability diagnostic needs a nonnegative sequence");
  r.tail_ratio = tail_ratio(a);
  r.half_tail_ratio = tail_ratio(a.first(a.size() / 2));
  r.tail_growing = a.size() >= 4 && r.tail_ratio > 1.05 * r.half_tail_ratio;
  const std::size_t positive = static_cast<std::size_t>(std::count_if(a.begin(), a.end(), [](double v) { return v > 0; }));
  const int gap = static_cast<int>(std::clamp<std::size_t>(positive / 2, 1, 20));
  if (positive >= 2) r.geometric = fit_linear_convergence(a, gap);
  return r;
}

double MonotonicityReport::overall() const { return std::max({pressure_refine, uzawa_update, velocity_refine}); }

MonotonicityReport quasi_monotonicity(const RunLog& log) {
  MonotonicityReport m;
  const auto& r = log.records;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (r[i].mu <= 0) continue;
    const double ratio = r[i + 1].mu / r[i].mu;
    switch (r[i].step) {
      case StepKind::PressureRefine: m.pressure_refine = std::max(m.pressure_refine, ratio); break;
      case StepKind::UzawaUpdate: m.uzawa_update = std::max(m.uzawa_update, ratio); break;
      case StepKind::VelocityRefine: m.velocity_refine = std::max(m.velocity_refine, ratio); break;
      case StepKind::Solve: break;
    }
  }
  return m;
}

double velocity_step_bound_ratio(const RunLog& log) {
  const double k2 = log.config.kappa2, k3 = log.config.kappa3;
  double worst = 0.0;
  for (const auto& r : log.records) {
    if (r.step != StepKind::VelocityRefine) continue;
    const double bound = (1.0 + 1.0 / k3) * r.eta / k2;
    if (bound > 0) worst = std::max(worst, r.mu / bound);
    else if (r.mu > 0) worst = std::numeric_limits<double>::infinity();
  }
  return worst;
}

RhoValue total_error_proxy(const Triangulation& t, const BodyForce& f, int surrogate_depth, int quad_order) {
  const Triangulation ref = refine_uniform(t, surrogate_depth);
  const VelocitySolver ref_solver(make_velocity_space(ref), f, quad_order);
  const PressureField p = solve_reduced_stokes(ref_solver, t).p;

  auto space = make_velocity_space(t);
  const VelocitySolver solver(space, f, quad_order);
  const VelocityField u = solver.solve(p).u;
  const Estimator est(space, f, quad_order);
  const EstimatorReport r = est(u, p);

  RhoValue v;
  v.rho = r.eta + r.div_norm;
  if (!f.identically_zero && f.f) {
    const auto& rule = triangle_rule(quad_order);
    const auto& fo = *t.forest;
    double osc = 0.0;
    for (std::size_t e = 0; e < space->num_elements(); ++e) {
      const auto& vv = space->elem_vertices[e];
      const double a = space->area[e];
      const auto& x0 = fo.vertex(vv[0]);
      const auto& x1 = fo.vertex(vv[1]);
      const auto& x2 = fo.vertex(vv[2]);
      const double ff = integrate(rule, x0, x1, x2, a, [&](const Vec2& x) { return f.f(x).squaredNorm(); });
      const Vec2 mean = integrate(rule, x0, x1, x2, a, [&](const Vec2& x) { return f.f(x); });
      osc += a * std::max(0.0, ff - mean.squaredNorm() / a);
    }
    v.osc = std::sqrt(osc);
  }
  return v;
}

ApproxClassReport approx_class_oracle(const Problem& problem, int n_max, double s, int surrogate_depth,
                                      int quad_order, std::size_t mesh_cap) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  const Triangulation init = initial_mesh(problem.domain);
  const auto n0 = init.size();

  // Breadth-first over single-element refinements; every conforming NVB mesh
  // is reachable this way because refine() produces the coarsest closure.
  std::set<std::vector<ElementId>> seen{init.leaves};
  std::vector<Triangulation> frontier{init};
  std::vector<Triangulation> family{init};
  ApproxClassReport rep;
  while (!frontier.empty() && !rep.budget_overflow) {
    std::vector<Triangulation> next;
    for (const auto& t : frontier) {
      for (ElementId e : t.leaves) {
        const ElementId mark[1] = {e};
        Triangulation r = refine_conforming(t, mark);
        if (static_cast<int>(r.size() - n0) > n_max) continue;
        if (!seen.insert(r.leaves).second) continue;
        if (family.size() >= mesh_cap) {
          rep.budget_overflow = true;
          break;
        }
        family.push_back(r);
        next.push_back(std::move(r));
      }
      if (rep.budget_overflow) break;
    }
    frontier = std::move(next);
  }
  rep.meshes_total = family.size();

  std::vector<std::pair<int, RhoValue>> values;
  values.reserve(family.size());
  for (const auto& t : family)
    values.emplace_back(static_cast<int>(t.size() - n0), total_error_proxy(t, problem.force, surrogate_depth, quad_order));

  rep.envelope.resize(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) rep.envelope[static_cast<std::size_t>(n)].n = n;
  for (auto& pt : rep.envelope) pt.rho_min = std::numeric_limits<double>::infinity();
  for (const auto& [n, v] : values) {
    ++rep.envelope[static_cast<std::size_t>(n)].meshes;
    for (int m = n; m <= n_max; ++m) {
      auto& pt = rep.envelope[static_cast<std::size_t>(m)];
      if (v.rho < pt.rho_min) {
        pt.rho_min = v.rho;
        pt.osc_at_min = v.osc;
      }
    }
  }

  std::vector<double> x, y;
  for (const auto& pt : rep.envelope) {
    rep.a_s_envelope = std::max(rep.a_s_envelope, std::pow(pt.n + 1.0, s) * pt.rho_min);
    if (pt.meshes > 0 || pt.n == 0) {
      x.push_back(pt.n + 1.0);
      y.push_back(pt.rho_min);
    }
  }
  if (x.size() >= 2) rep.rate = fit_power_law(x, y);

  // Accuracy-based form. With distinct rho values v_1 < ... < v_M and
  // c_k = min{n : rho <= v_k}, the cost is c_k on [v_k, v_{k+1}), so the
  // supremum of eps * cost^s over that interval is the left limit v_{k+1} c_k^s.
  std::map<double, int> cheapest;
  for (const auto& [n, v] : values) {
    auto [it, fresh] = cheapest.emplace(v.rho, n);
    if (!fresh) it->second = std::min(it->second, n);
  }
  int prefix = std::numeric_limits<int>::max();
  for (auto it = cheapest.begin(); it != cheapest.end(); ++it) {
    prefix = std::min(prefix, it->second);
    const auto nx = std::next(it);
    if (nx != cheapest.end())
      rep.a_s_accuracy = std::max(rep.a_s_accuracy, nx->first * std::pow(static_cast<double>(prefix), s));
  }
  return rep;
}

}  // namespace uzawa
