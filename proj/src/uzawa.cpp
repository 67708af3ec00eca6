#include "uzawa/uzawa.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "uzawa/io.hpp"
#include "uzawa/tree_approx.hpp"

namespace uzawa {

RefinementMode parse_refinement_mode(const std::string& s) {
  if (s == "adaptive") return RefinementMode::Adaptive;
  if (s == "uniform") return RefinementMode::Uniform;
  throw ValidationError("unknown refinement '" + s + "' (expected adaptive or uniform)");
}

std::string to_string(RefinementMode m) { return m == RefinementMode::Adaptive ? "adaptive" : "uniform"; }

std::string to_string(StepKind s) {
  switch (s) {
    case StepKind::Solve: return "solve";
    case StepKind::PressureRefine: return "pressure_refine";
    case StepKind::UzawaUpdate: return "uzawa_update";
    case StepKind::VelocityRefine: return "velocity_refine";
  }
  return "?";
}

namespace {
StepKind parse_step(const std::string& s) {
  for (StepKind k : {StepKind::Solve, StepKind::PressureRefine, StepKind::UzawaUpdate, StepKind::VelocityRefine})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown step kind '" + s + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("invalid configuration: " + what);
}
}  // namespace

void validate(const AlgorithmConfig& c) {
  require(c.kappa1 >= 0.0 && c.kappa1 < 1.0, "kappa1 must satisfy 0 <= kappa1 < 1");
  require(c.kappa2 > 0.0 && c.kappa2 < 1.0, "kappa2 must lie in (0, 1)");
  require(c.kappa3 > 0.0 && c.kappa3 < 1.0, "kappa3 must lie in (0, 1)");
  require(c.vartheta > 0.0 && c.vartheta <= 1.0, "vartheta must lie in (0, 1]");
  require(c.theta > 0.0 && c.theta <= 1.0, "theta must lie in (0, 1]");
  require(c.c_mark >= 1.0, "c_mark must be >= 1");
  require(c.kappa2 < c.vartheta, "kappa2 < vartheta is required (pressure refinement must run at most once per visit)");
  require(c.solver == SolverMode::Direct || c.kappa1 > 0.0, "solver = pcg requires kappa1 > 0");
  require(c.quad_order >= 2 && c.quad_order <= 8, "quad_order must lie in [2, 8]");
  require(c.mu_tol >= 0.0, "mu_tol must be >= 0");
  require(c.max_elements >= 1, "max_elements must be >= 1");
  require(c.max_steps >= 0, "max_steps must be >= 0");
  require(c.pcg_max_iter >= 1, "pcg_max_iter must be >= 1");
}

StepPredicates step_predicates(double eta, double proj_div, double div, double kappa2, double kappa3) {
  return {eta + proj_div <= kappa2 * (eta + div), eta <= kappa3 * proj_div};
}

PressureField uzawa_update(const PressureField& p, const PressureField& proj_div) {
  PressureField r = p - proj_div;
  enforce_zero_mean(r);
  return r;
}

RunResult run(const AlgorithmConfig& config, const StepObserver& observer) {
  return run(config, make_problem(config.problem), observer);
}

RunResult run(const AlgorithmConfig& config, const Problem& problem, const StepObserver& observer) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  Triangulation tri = initial_mesh(config.domain.empty() ? problem.domain : parse_domain(config.domain));
  Partition part = tri;
  PressureField q = zero_pressure(part);

  RunLog log;
  log.config = config;
  log.initial_elements = tri.size();

  auto space = make_velocity_space(tri);
  std::optional<VelocitySolver> solver(std::in_place, space, problem.force, config.quad_order);
  std::optional<Estimator> estimator(std::in_place, space, problem.force, config.quad_order);
  std::optional<VelocityField> previous;

  int n = 0, i = 0, j = 0, k = 0;
  const auto fail = [&](const std::string& what) { throw RunFailure(what, log); };
  const auto check = [&](bool ok, const char* what) {
    if (config.check_invariants && !ok) fail(std::string("invariant violated: ") + what);
  };

  while (true) {
    // (i) velocity solve on (T_ijk, P_ij)
    VelocitySolution sol;
    try {
      SolveOptions opt;
      opt.mode = config.solver;
      opt.kappa1 = config.kappa1;
      opt.max_iterations = config.pcg_max_iter;
      if (previous) opt.warm_start = &*previous;
      EstimatorHook hook;
      if (config.solver == SolverMode::Pcg) {
        const Eigen::VectorXd qe = transfer(q, tri).coeffs;
        hook = [&, qe](const VelocityField& u) { return std::sqrt(estimator->indicators(u, qe).sum()); };
      }
      sol = solver->solve(q, opt, hook);
    } catch (const SolverError& e) {
      fail(e.what());
    }
    const VelocityField& u = sol.u;
    EstimatorReport est = (*estimator)(u, q);

    RunRecord rec;
    const auto fill = [&](StepKind step) {
      rec.n = n;
      rec.i = i;
      rec.j = j;
      rec.k = k;
      rec.step = step;
      rec.partition_size = part.size();
      rec.triangulation_size = tri.size();
      rec.eta = est.eta;
      rec.div_norm = est.div_norm;
      rec.proj_div_norm = est.proj_div_norm;
      rec.mu = est.eta + est.div_norm;
      rec.solver = sol.report;
      rec.wall_time = elapsed();
    };
    const auto emit = [&] {
      log.records.push_back(rec);
      if (observer) observer({log.records.back(), u, q, est});
      ++n;
    };

    // Stop rule before step (ii).
    const double mu = est.eta + est.div_norm;
    std::string stop;
    if (mu <= config.mu_tol)
      stop = "mu_tol";
    else if (tri.size() >= config.max_elements)
      stop = "max_elements";
    else if (n >= config.max_steps)
      stop = "max_steps";
    if (!stop.empty()) {
      fill(StepKind::Solve);
      emit();
      log.stop_reason = stop;
      return {std::move(log), u, q, tri, std::move(est)};
    }

    // (ii) pressure refinement; runs at most once since kappa2 < vartheta.
    int visits = 0;
    while (step_predicates(est.eta, est.proj_div_norm, est.div_norm, config.kappa2, config.kappa3).while_cond) {
      if (++visits > 1) fail("pressure refinement repeated within one visit");
      BinevResult b;
      try {
        b = binev(part, u, config.vartheta);
      } catch (const std::logic_error& e) {
        fail(e.what());
      }
      check(is_refinement_of(b.partition, part), "new pressure partition refines the old one");
      check(is_refinement_of(tri, b.partition), "triangulation refines the pressure partition");
      fill(StepKind::PressureRefine);
      emit();
      q = transfer(q, b.partition);
      part = std::move(b.partition);
      ++i;
      j = k = 0;
      est.pressure_partition = part;
      est.proj_div_norm = l2_norm(l2_project_div(part, u));
      check(binev_criterion(config.vartheta * est.div_norm, est.proj_div_norm), "tree approximation criterion");
    }

    if (step_predicates(est.eta, est.proj_div_norm, est.div_norm, config.kappa2, config.kappa3).if_cond) {
      // (iii) Uzawa update on the current partition.
      fill(StepKind::UzawaUpdate);
      emit();
      q = uzawa_update(q, l2_project_div(part, u));
      ++j;
      k = 0;
      previous = u;
    } else {
      // (iv) mark and refine the velocity triangulation.
      fill(StepKind::VelocityRefine);
      emit();
      std::vector<ElementId> marked;
      if (config.refinement == RefinementMode::Uniform)
        marked = tri.leaves;
      else
        marked = doerfler_mark(est, config.theta);
      Triangulation next = refine_conforming(tri, marked);
      check(is_refinement_of(next, tri), "refined triangulation refines the old one");
      check(next.conforming, "refined triangulation is conforming");
      tri = std::move(next);
      ++k;
      auto next_space = make_velocity_space(tri);
      if (config.solver == SolverMode::Pcg)
        previous = prolongate(u, next_space);
      else
        previous.reset();
      space = next_space;
      solver.emplace(space, problem.force, config.quad_order);
      estimator.emplace(space, problem.force, config.quad_order);
    }
  }
}

void write_csv(std::ostream& os, const RunLog& log, bool include_wall_time) {
  os << "n,i,j,k,step,partition_size,triangulation_size,eta,div_norm,proj_div_norm,mu,"
        "solver_mode,solver_iterations,solver_update_norm,solver_criterion_met";
  if (include_wall_time) os << ",wall_time";
  os << '\n';
  for (const auto& r : log.records) {
    os << r.n << ',' << r.i << ',' << r.j << ',' << r.k << ',' << to_string(r.step) << ',' << r.partition_size << ','
       << r.triangulation_size << ',' << format_double(r.eta) << ',' << format_double(r.div_norm) << ','
       << format_double(r.proj_div_norm) << ',' << format_double(r.mu) << ',' << to_string(r.solver.mode) << ','
       << r.solver.iterations << ',' << format_double(r.solver.final_update_norm) << ','
       << (r.solver.criterion_met ? 1 : 0);
    if (include_wall_time) os << ',' << format_double(r.wall_time);
    os << '\n';
  }
}

RunLog read_csv(std::istream& is) {
  RunLog log;
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,i,j,k,step", 0) != 0) throw ValidationError("not a run log CSV");
  const bool has_time = line.find("wall_time") != std::string::npos;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != (has_time ? 16u : 15u)) throw ValidationError("run log line " + std::to_string(lineno) + ": wrong column count");
    RunRecord r;
    try {
      r.n = std::stoi(f[0]);
      r.i = std::stoi(f[1]);
      r.j = std::stoi(f[2]);
      r.k = std::stoi(f[3]);
      r.step = parse_step(f[4]);
      r.partition_size = std::stoul(f[5]);
      r.triangulation_size = std::stoul(f[6]);
      r.eta = parse_double(f[7]);
      r.div_norm = parse_double(f[8]);
      r.proj_div_norm = parse_double(f[9]);
      r.mu = parse_double(f[10]);
      r.solver.mode = parse_solver_mode(f[11]);
      r.solver.iterations = std::stoi(f[12]);
      r.solver.final_update_norm = parse_double(f[13]);
      r.solver.criterion_met = f[14] == "1";
      if (has_time) r.wall_time = parse_double(f[15]);
    } catch (const std::logic_error&) {
      throw ValidationError("run log line " + std::to_string(lineno) + ": malformed field");
    }
    log.records.push_back(r);
  }
  if (!log.records.empty()) log.initial_elements = log.records.front().triangulation_size;
  return log;
}

}  // namespace uzawa
