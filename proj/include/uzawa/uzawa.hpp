#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "uzawa/estimator.hpp"
#include "uzawa/fem.hpp"
#include "uzawa/poisson.hpp"
#include "uzawa/problems.hpp"

namespace uzawa {

enum class RefinementMode { Adaptive, Uniform };
RefinementMode parse_refinement_mode(const std::string& s);
std::string to_string(RefinementMode m);

struct AlgorithmConfig {
  double kappa1 = 0.0;
  double kappa2 = 0.1;
  double kappa3 = 0.3;
  double vartheta = 0.3;
  double theta = 0.3;
  double c_mark = 1.0;
  SolverMode solver = SolverMode::Direct;
  int quad_order = 4;
  // Stop rule: whichever comes first.
  double mu_tol = 0.0;
  std::size_t max_elements = 10000;
  int max_steps = 100000;
  std::string problem = "smooth";
  std::string domain;  ///< empty: the problem's own domain
  RefinementMode refinement = RefinementMode::Adaptive;
  std::uint64_t seed = 0;
  int pcg_max_iter = 20000;
  /// Nestedness and tree-approximation postconditions asserted every step.
  bool check_invariants = true;
};

/// Throws ValidationError naming the first violated constraint.
void validate(const AlgorithmConfig& c);

enum class StepKind { Solve, PressureRefine, UzawaUpdate, VelocityRefine };
std::string to_string(StepKind s);

struct RunRecord {
  int n = 0, i = 0, j = 0, k = 0;
  StepKind step = StepKind::Solve;
  std::size_t partition_size = 0;
  std::size_t triangulation_size = 0;
  double eta = 0, div_norm = 0, proj_div_norm = 0, mu = 0;
  SolveReport solver;
  double wall_time = 0;  ///< seconds since the start of the run
};

struct RunLog {
  AlgorithmConfig config;
  std::size_t initial_elements = 0;
  std::vector<RunRecord> records;
  std::string stop_reason;  ///< mu_tol, max_elements or max_steps
};

struct StepPredicates {
  bool while_cond = false;  ///< eta + ||Pi div U|| <= kappa2 (eta + ||div U||)
  bool if_cond = false;     ///< eta <= kappa3 ||Pi div U||
};
StepPredicates step_predicates(double eta, double proj_div, double div, double kappa2, double kappa3);

/// P - Pi div U on the same partition, with defensive mean correction.
PressureField uzawa_update(const PressureField& p, const PressureField& proj_div);

struct RunResult {
  RunLog log;
  VelocityField u;
  PressureField p;
  Triangulation tri;
  EstimatorReport estimate;
};

/// Carries the log up to the failing step.
class RunFailure : public std::runtime_error {
public:
  RunFailure(const std::string& what, RunLog log) : std::runtime_error(what), log_(std::move(log)) {}
  const RunLog& log() const { return log_; }

private:
  RunLog log_;
};

/// Observer called after every record with the current fields.
struct StepView {
  const RunRecord& record;
  const VelocityField& u;
  const PressureField& p;
  const EstimatorReport& estimate;
};
using StepObserver = std::function<void(const StepView&)>;

RunResult run(const AlgorithmConfig& config, const StepObserver& observer = {});
RunResult run(const AlgorithmConfig& config, const Problem& problem, const StepObserver& observer = {});

/// CSV with one row per record; wall time only on request so that repeated
/// runs produce identical files.
void write_csv(std::ostream& os, const RunLog& log, bool include_wall_time = false);
/// Inverse of write_csv (wall time read when present). Config fields are not stored.
RunLog read_csv(std::istream& is);

}  // namespace uzawa
