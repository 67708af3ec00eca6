#pragma once

#include <iosfwd>
#include <vector>

#include "uzawa/fem.hpp"

namespace uzawa {

/// e(T): squared L2 distance of div V to its mean over the forest element
/// `elem`. V's triangulation must cover `elem` (or lie inside it).
double local_best_error(ElementId elem, const VelocityField& v);

struct BinevTraceRow {
  int step = 0;
  ElementId elem = kNoElement;
  double e = 0, etilde = 0;
  double crit_lhs = 0;  ///< vartheta ||div V||
  double crit_rhs = 0;  ///< ||Pi_P' div V|| before the bisection
};

struct BinevResult {
  Partition partition;
  int bisections = 0;
  double crit_lhs = 0, crit_rhs = 0;  ///< at return
  std::vector<BinevTraceRow> trace;
};

/// Relative slack used when comparing the two sides of the stopping rule.
inline constexpr double kCriterionSlack = 1e-12;
inline bool binev_criterion(double lhs, double rhs) { return lhs <= rhs + kCriterionSlack * lhs; }

/// Greedy tree approximation: bisects the element of largest modified error
/// until vartheta ||div V|| <= ||Pi_P' div V||. V must live on a conforming
/// refinement of p. Throws std::logic_error if the criterion cannot be met.
BinevResult binev(const Partition& p, const VelocityField& v, double vartheta, bool record_trace = false);

void write_binev_trace(std::ostream& os, const std::vector<BinevTraceRow>& trace);

struct QuasiOptimalityReport {
  int greedy_bisections = 0;
  bool comparator_found = false;
  int min_bisections = -1;  ///< fewest bisections of a partition meeting the vartheta' criterion
  double c_bin = 0;         ///< greedy / minimal, 0/0 := 1
  std::size_t states_explored = 0;
  bool state_cap_hit = false;
};

/// Compares binev(vartheta) against an exhaustive search over all partitions
/// within `budget` bisections of p that meet the criterion with vartheta_prime.
QuasiOptimalityReport quasi_optimality_audit(const Partition& p, const VelocityField& v, double vartheta,
                                             double vartheta_prime, int budget);

}  // namespace uzawa
