#include "uzawa/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <Eigen/Dense>

#include "uzawa/rng.hpp"

namespace uzawa {

SolverMode parse_solver_mode(const std::string& s) {
  if (s == "direct") return SolverMode::Direct;
  if (s == "pcg") return SolverMode::Pcg;
  throw ValidationError("unknown solver '" + s + "' (expected direct or pcg)");
}

std::string to_string(SolverMode m) { return m == SolverMode::Direct ? "direct" : "pcg"; }

Eigen::MatrixX2d pressure_load(const VelocitySpace& space, const PressureField& q) {
  if (q.degree != 0) throw ContractViolation("only piecewise constant pressures are supported");
  const auto owner = ancestor_index(space.tri, q.partition);
  Eigen::MatrixX2d r = Eigen::MatrixX2d::Zero(space.num_dofs, 2);
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const double c = q.coeffs[owner[e]] * space.area[e];
    if (c == 0.0) continue;
    const auto& v = space.elem_vertices[e];
    const auto& g = space.hat_gradients[e];
    for (int k = 0; k < 3; ++k) {
      const int d = space.dof(v[k]);
      if (d >= 0) r.row(d) += c * g.col(k).transpose();
    }
  }
  return r;
}

VelocitySolver::VelocitySolver(std::shared_ptr<const VelocitySpace> space, const BodyForce& f, int quad_order)
    : space_(std::move(space)), stiffness_(assemble_stiffness(*space_)), load_(load_vector(*space_, f, quad_order)) {}

const Eigen::SimplicialLDLT<SparseMatrix>& VelocitySolver::factorization() const {
  if (!ldlt_) {
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
    if (space_->num_dofs > 0) {
      ldlt->compute(stiffness_);
      if (ldlt->info() != Eigen::Success) throw SolverError("stiffness factorization failed", {});
    }
    ldlt_ = std::move(ldlt);
  }
  return *ldlt_;
}

Eigen::MatrixX2d VelocitySolver::rhs(const PressureField& q) const { return load_ + pressure_load(*space_, q); }

Eigen::MatrixXd VelocitySolver::solve_stiffness(const Eigen::MatrixXd& r) const {
  if (space_->num_dofs == 0) return Eigen::MatrixXd::Zero(0, r.cols());
  return factorization().solve(r);
}

VelocitySolution VelocitySolver::solve(const PressureField& q, const SolveOptions& opt,
                                       const EstimatorHook& hook) const {
  if (opt.mode == SolverMode::Pcg) return solve_pcg(q, opt, hook);
  VelocitySolution out{zero_velocity(space_), {}};
  out.report.mode = SolverMode::Direct;
  if (space_->num_dofs > 0) out.u.values = solve_stiffness(rhs(q));
  return out;
}

VelocitySolution VelocitySolver::solve_pcg(const PressureField& q, const SolveOptions& opt,
                                           const EstimatorHook& hook) const {
  if (!(opt.kappa1 > 0.0)) throw ContractViolation("pcg requires kappa1 > 0");
  if (!hook) throw ContractViolation("pcg requires an estimator hook");
  SolveReport rep;
  rep.mode = SolverMode::Pcg;
  rep.criterion_met = false;

  VelocityField x = zero_velocity(space_);
  if (opt.warm_start) {
    if (opt.warm_start->space->tri.leaves != space_->tri.leaves)
      throw ContractViolation("warm start lives on a different triangulation");
    x.values = opt.warm_start->values;
  }
  const Eigen::MatrixX2d b = rhs(q);
  const double bnorm = b.norm();
  if (space_->num_dofs == 0 || bnorm == 0.0) {
    x.values.setZero();
    rep.criterion_met = true;
    return {x, rep};
  }

  const Eigen::VectorXd inv_diag = stiffness_.diagonal().cwiseInverse();
  Eigen::MatrixX2d r = b - stiffness_ * x.values;
  Eigen::MatrixX2d z = inv_diag.asDiagonal() * r;
  Eigen::MatrixX2d p = z;
  double rz = (r.array() * z.array()).sum();

  // Errors of CG iterates obey ||e_l||^2 = sum_{i >= l} d_i^2, so a
  // contraction q of the updates gives ||e_{l+1}|| <= q/(1-q) d_l. The
  // contraction is the largest of the last few observed update ratios.
  constexpr std::size_t kWindow = 5;
  std::deque<double> ratios;
  double prev_d = -1.0;

  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::MatrixX2d ap = stiffness_ * p;
    const double pap = (p.array() * ap.array()).sum();
    if (!(pap > 0.0)) {
      rep.iterations = it - 1;
      throw SolverError("pcg breakdown: non-positive curvature", rep);
    }
    const double alpha = rz / pap;
    x.values += alpha * p;
    r -= alpha * ap;
    const double d = std::abs(alpha) * std::sqrt(pap);
    rep.iterations = it;
    rep.final_update_norm = d;
    if (opt.on_iterate) opt.on_iterate(it, x);

    if (prev_d > 0.0) {
      ratios.push_back(d / prev_d);
      if (ratios.size() > kWindow) ratios.pop_front();
    }
    prev_d = d;

    if (r.norm() <= 1e-14 * bnorm) {
      rep.criterion_met = true;
      rep.contraction_estimate = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
      return {x, rep};
    }
    if (ratios.size() >= 3) {
      const double qh = *std::max_element(ratios.begin(), ratios.end());
      if (qh < 1.0) {
        const double tol = opt.kappa1 * (1.0 - qh) / qh;
        if (d <= tol * hook(x)) {
          rep.criterion_met = true;
          rep.contraction_estimate = qh;
          return {x, rep};
        }
      }
    }

    z = inv_diag.asDiagonal() * r;
    const double rz_new = (r.array() * z.array()).sum();
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "pcg did not meet its stopping rule within " << opt.max_iterations << " iterations (last update "
      << rep.final_update_norm << ")";
  throw SolverError(msg.str(), rep);
}

VelocitySolution solve_velocity(std::shared_ptr<const VelocitySpace> space, const PressureField& q,
                                const BodyForce& f, int quad_order, const SolveOptions& opt,
                                const EstimatorHook& hook) {
  return VelocitySolver(std::move(space), f, quad_order).solve(q, opt, hook);
}

namespace {
BodyForce no_force() {
  BodyForce f;
  f.name = "zero";
  f.identically_zero = true;
  return f;
}
}  // namespace

SchurSurrogate::SchurSurrogate(const Partition& base, int depth)
    : base_(base),
      reference_(refine_uniform(close(base), depth)),
      depth_(depth),
      solver_(make_velocity_space(reference_), no_force(), 1) {
  if (depth < 0) throw ContractViolation("surrogate depth must be non-negative");
}

SchurSurrogate::Application SchurSurrogate::apply(const PressureField& q) const {
  if (!is_refinement_of(reference_, q.partition))
    throw ContractViolation("surrogate reference triangulation does not refine the pressure partition");
  // a(w, v) = b(v, q); then S q = -div w and <Sq, q> = a(w, w).
  Application out{zero_pressure(reference_), 0.0, zero_velocity(space())};
  const auto& sp = *space();
  if (sp.num_dofs > 0) out.w.values = -solver_.solve_stiffness(pressure_load(sp, q));
  for (std::size_t e = 0; e < sp.num_elements(); ++e)
    out.s_q.coeffs[static_cast<Eigen::Index>(e)] = -out.w.divergence(static_cast<int>(e));
  out.norm = energy_norm(out.w);
  return out;
}

SchurSurrogate::Application schur_apply(const PressureField& q, const SchurSurrogate& s) { return s.apply(q); }

PressureField l2_project(const PressureField& q, const Partition& coarse) {
  if (q.degree != 0) throw ContractViolation("only piecewise constant pressures are supported");
  const auto owner = ancestor_index(q.partition, coarse);
  PressureField out = zero_pressure(coarse);
  const Eigen::VectorXd a = leaf_areas(q.partition);
  for (std::size_t i = 0; i < owner.size(); ++i)
    out.coeffs[owner[i]] += a[static_cast<Eigen::Index>(i)] * q.coeffs[static_cast<Eigen::Index>(i)];
  out.coeffs.array() /= leaf_areas(coarse).array();
  return out;
}

namespace {

// Largest |lambda| of a self-adjoint map on zero-mean pressures of `p`.
template <class Op>
double power_iteration(const Partition& p, Op&& op, int iters, std::uint64_t seed, const char* what) {
  if (p.size() < 2) return 0.0;
  Rng rng(seed);
  PressureField x = zero_pressure(p);
  for (Eigen::Index i = 0; i < x.coeffs.size(); ++i) x.coeffs[i] = rng.uniform(-1.0, 1.0);
  x.coeffs.array() -= integral_mean(x);
  x = (1.0 / l2_norm(x)) * x;

  std::vector<double> trace;
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    PressureField y = op(x);
    y.coeffs.array() -= integral_mean(y);
    const double n = l2_norm(y);
    trace.push_back(n);
    if (n == 0.0) return 0.0;
    const double prev = est;
    est = n;
    x = (1.0 / n) * y;
    if (k > 5 && std::abs(est - prev) <= 1e-10 * est) return est;
  }
  const std::size_t m = trace.size();
  const double drift = m >= 2 ? std::abs(trace[m - 1] - trace[m - 2]) / trace[m - 1] : 1.0;
  if (drift > 1e-4) {
    std::ostringstream msg;
    msg << what << ": power iteration did not settle; last estimates";
    for (std::size_t i = m >= 5 ? m - 5 : 0; i < m; ++i) msg << ' ' << trace[i];
    throw std::runtime_error(msg.str());
  }
  return est;
}

}  // namespace

double richardson_contraction_estimate(double alpha, const SchurSurrogate& s, int iters, std::uint64_t seed) {
  return power_iteration(
      s.base(),
      [&](const PressureField& q) {
        if (alpha == 0.0) return q;
        return q - alpha * l2_project(s.apply(q).s_q, s.base());
      },
      iters, seed, "richardson contraction");
}

double schur_norm_estimate(const SchurSurrogate& s, int iters, std::uint64_t seed) {
  return power_iteration(
      s.base(), [&](const PressureField& q) { return l2_project(s.apply(q).s_q, s.base()); }, iters, seed,
      "schur norm");
}

ReducedSolution solve_reduced_stokes(const VelocitySolver& ref_solver, const Partition& pressure_partition) {
  const auto& space = ref_solver.space();
  if (!is_refinement_of(space->tri, pressure_partition))
    throw ContractViolation("reference triangulation does not refine the pressure partition");
  const auto m = static_cast<Eigen::Index>(pressure_partition.size());

  // Eliminate the velocity: u = u_F + sum_i p_i W_i with W_i = A^{-1} L_i,
  // L_i = (e_i, div .). Incompressibility then reads G p = -c, G_ji = L_j . W_i.
  std::vector<Eigen::MatrixX2d> loads(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    PressureField ei = zero_pressure(pressure_partition);
    ei.coeffs[i] = 1.0;
    loads[static_cast<std::size_t>(i)] = pressure_load(*space, ei);
  }
  const Eigen::MatrixX2d uf = space->num_dofs > 0 ? Eigen::MatrixX2d(ref_solver.solve_stiffness(ref_solver.load()))
                                                  : Eigen::MatrixX2d(0, 2);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  const Eigen::VectorXd areas = leaf_areas(pressure_partition);
  std::vector<Eigen::MatrixX2d> w(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& li = loads[static_cast<std::size_t>(i)];
    w[static_cast<std::size_t>(i)] =
        space->num_dofs > 0 ? Eigen::MatrixX2d(ref_solver.solve_stiffness(li)) : Eigen::MatrixX2d(0, 2);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& lj = loads[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < m; ++i) sys(j, i) = (lj.array() * w[static_cast<std::size_t>(i)].array()).sum();
    rhs[j] = -(lj.array() * uf.array()).sum();
    sys(j, m) = areas[j];
    sys(m, j) = areas[j];
  }
  const Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);

  ReducedSolution out{zero_velocity(space), zero_pressure(pressure_partition)};
  out.p.coeffs = sol.head(m);
  out.u.values = uf;
  for (Eigen::Index i = 0; i < m; ++i) out.u.values += out.p.coeffs[i] * w[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace uzawa
