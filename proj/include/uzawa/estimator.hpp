#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "uzawa/fem.hpp"

namespace uzawa {

/// Residual indicators of a (velocity, pressure) pair on a triangulation.
/// Entry `e` of `eta_sq` belongs to `tri.leaves[e]`.
struct EstimatorReport {
  Triangulation tri;
  Eigen::VectorXd eta_sq;
  double eta_sq_total = 0.0;
  double eta = 0.0;
  Partition pressure_partition;
  double div_norm = 0.0;       ///< ||div U||
  double proj_div_norm = 0.0;  ///< ||Pi_P div U|| on the pressure partition

  double element(ElementId id) const;
};

/// Residual estimator with the volume terms h_T^2 ||f||_T^2 (independent of
/// the discrete fields) precomputed for one triangulation.
class Estimator {
public:
  Estimator(std::shared_ptr<const VelocitySpace> space, const BodyForce& f, int quad_order);

  /// Requires u to live on this triangulation and the triangulation to
  /// refine q's partition.
  EstimatorReport operator()(const VelocityField& u, const PressureField& q) const;
  double eta(const VelocityField& u, const PressureField& q) const { return (*this)(u, q).eta; }
  /// Indicators with the pressure given per velocity element (cheap inner-loop form).
  Eigen::VectorXd indicators(const VelocityField& u, const Eigen::VectorXd& q_on_elements) const;

  const Eigen::VectorXd& volume_terms() const { return volume_; }

private:
  std::shared_ptr<const VelocitySpace> space_;
  Eigen::VectorXd volume_;
};

EstimatorReport estimate(const VelocityField& u, const PressureField& q, const BodyForce& f, int quad_order);

/// sqrt of the indicator sum over `subset` (leaf ids of the report's triangulation).
double estimate_subset(const EstimatorReport& r, std::span<const ElementId> subset);

/// Smallest set reaching theta * total, taken greedily by decreasing
/// indicator (ties by increasing element id). Returns leaf ids.
std::vector<ElementId> doerfler_mark(const EstimatorReport& r, double theta);

/// "elem_id,eta_sq" lines, one per leaf.
void write_indicators_csv(std::ostream& os, const EstimatorReport& r);

}  // namespace uzawa
