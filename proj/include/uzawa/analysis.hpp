#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "uzawa/problems.hpp"
#include "uzawa/uzawa.hpp"

namespace uzawa {

/// Least-squares fit of log y = c - s log x.
struct RateFit {
  double s = 0;
  double intercept = 0;  ///< c
  double residual = 0;   ///< 2-norm of the log residuals
  double sup_statistic = 0;  ///< max y x^s over the fitted points
  std::vector<double> x, y;  ///< fitted points
};

RateFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// One point per velocity mesh: the last record computed on it, with
/// x = #T - #T_init + 1 and y = mu.
void mesh_change_points(const RunLog& log, std::vector<double>& x, std::vector<double>& y);

/// Rate over the last `window` fraction of the mesh points. Requires at
/// least 20 mesh points and 10 in the window; throws std::invalid_argument.
RateFit fit_rate(const RunLog& log, double window = 0.5);

struct LinearConvergenceFit {
  double q_hat = 0;
  double c_hat = 0;
  bool contractive = false;  ///< q_hat < 1
};

/// q = max over pairs with gap >= min_gap of (mu_n / mu_n')^(1/(n-n')),
/// C = max over all pairs of mu_n / (q^(n-n') mu_n').
LinearConvergenceFit fit_linear_convergence(std::span<const double> mu, int min_gap = 20);
LinearConvergenceFit fit_linear_convergence(const RunLog& log, int min_gap = 20);

struct SummabilityReport {
  double tail_ratio = 0;   ///< max_l sum_{n >= l} a_n / a_l
  double half_tail_ratio = 0;  ///< same on the first half of the sequence
  bool tail_growing = false;   ///< tail ratio grew by more than 5% over the last doubling
  LinearConvergenceFit geometric;
};
SummabilityReport summability_diagnostic(std::span<const double> a);

/// Largest mu ratio across each kind of transition.
struct MonotonicityReport {
  double pressure_refine = 0;
  double uzawa_update = 0;
  double velocity_refine = 0;
  double overall() const;
};
MonotonicityReport quasi_monotonicity(const RunLog& log);

/// Largest mu / ((1 + 1/kappa3) eta / kappa2) over records that refine the
/// velocity mesh; at most 1 by construction of the step conditions.
double velocity_step_bound_ratio(const RunLog& log);

struct EnvelopePoint {
  int n = 0;             ///< #T - #T_init
  double rho_min = 0;    ///< min over conforming meshes with at most n added elements
  double osc_at_min = 0; ///< data oscillation on the minimizing mesh
  std::size_t meshes = 0; ///< meshes with exactly n added elements
};

struct ApproxClassReport {
  std::vector<EnvelopePoint> envelope;
  std::size_t meshes_total = 0;
  bool budget_overflow = false;
  RateFit rate;         ///< fit of the envelope against n + 1
  double a_s_envelope = 0;  ///< max_N (N+1)^s env(N)
  double a_s_accuracy = 0;  ///< sup_eps eps min{(#T - #T_init)^s : rho(T) <= eps} on the family
};

/// Enumerates every conforming refinement of the problem's initial mesh with
/// at most n_max added elements; rho(T) uses the pressure from the reduced
/// problem on `surrogate_depth` uniform refinements of T.
ApproxClassReport approx_class_oracle(const Problem& problem, int n_max, double s, int surrogate_depth = 3,
                                      int quad_order = 4, std::size_t mesh_cap = 100000);

/// rho(T) = eta(T; U_T[p_T], p_T) + ||div U_T[p_T]|| and osc(T).
struct RhoValue {
  double rho = 0, osc = 0;
};
RhoValue total_error_proxy(const Triangulation& t, const BodyForce& f, int surrogate_depth, int quad_order);

}  // namespace uzawa
