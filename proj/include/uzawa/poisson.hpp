#pragma once

#include <functional>
#include <memory>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "uzawa/fem.hpp"

namespace uzawa {

enum class SolverMode { Direct, Pcg };

SolverMode parse_solver_mode(const std::string& s);
std::string to_string(SolverMode m);

struct SolveReport {
  SolverMode mode = SolverMode::Direct;
  int iterations = 0;               ///< 0 exactly for direct solves
  double final_update_norm = 0.0;   ///< ||U^{l+1} - U^l||_V of the accepted PCG step
  bool criterion_met = true;        ///< stopping rule satisfied
  double contraction_estimate = 0;  ///< observed PCG contraction used to derive the update tolerance
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, SolveReport report) : std::runtime_error(what), report_(report) {}
  const SolveReport& report() const { return report_; }

private:
  SolveReport report_;
};

/// Estimator value eta(T; U, Q) for an intermediate iterate.
using EstimatorHook = std::function<double(const VelocityField&)>;

struct SolveOptions {
  SolverMode mode = SolverMode::Direct;
  /// Target for ||U_T[Q] - U||_V <= kappa1 * eta(T; U, Q) in PCG mode.
  double kappa1 = 0.0;
  int max_iterations = 20000;
  /// Initial PCG iterate; must live on the same space.
  const VelocityField* warm_start = nullptr;
  /// Called after every PCG iteration with the iteration count and iterate.
  std::function<void(int, const VelocityField&)> on_iterate;
};

struct VelocitySolution {
  VelocityField u;
  SolveReport report;
};

/// Galerkin solver for a(U, V) = <f, V> - b(V, Q) on one triangulation. The
/// stiffness matrix, load vector and (lazily) its factorization are reused
/// across pressures.
class VelocitySolver {
public:
  VelocitySolver(std::shared_ptr<const VelocitySpace> space, const BodyForce& f, int quad_order);

  VelocitySolution solve(const PressureField& q, const SolveOptions& opt = {},
                         const EstimatorHook& hook = {}) const;
  /// Right-hand side <f, phi> - b(phi, q) for every free dof and component.
  Eigen::MatrixX2d rhs(const PressureField& q) const;
  /// Solves K X = R column by column with the cached factorization.
  Eigen::MatrixXd solve_stiffness(const Eigen::MatrixXd& r) const;

  const SparseMatrix& stiffness() const { return stiffness_; }
  const std::shared_ptr<const VelocitySpace>& space() const { return space_; }
  const Eigen::MatrixX2d& load() const { return load_; }

private:
  const Eigen::SimplicialLDLT<SparseMatrix>& factorization() const;
  VelocitySolution solve_pcg(const PressureField& q, const SolveOptions& opt, const EstimatorHook& hook) const;

  std::shared_ptr<const VelocitySpace> space_;
  SparseMatrix stiffness_;
  Eigen::MatrixX2d load_;
  mutable std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
};

/// -b(phi, q) = (q, div phi) for every free dof and component.
Eigen::MatrixX2d pressure_load(const VelocitySpace& space, const PressureField& q);

/// One-shot Galerkin solve U_T[q].
VelocitySolution solve_velocity(std::shared_ptr<const VelocitySpace> space, const PressureField& q,
                                const BodyForce& f, int quad_order, const SolveOptions& opt = {},
                                const EstimatorHook& hook = {});

/// Discrete stand-in for the Schur complement S = div lap^{-1} grad: the
/// Poisson solve is carried out on `depth` uniform refinements of close(P).
class SchurSurrogate {
public:
  SchurSurrogate(const Partition& base, int depth = 3);

  struct Application {
    PressureField s_q;  ///< -div w, piecewise constant on the reference triangulation
    double norm = 0;    ///< ||q||_P,ref = ||w||_V
    VelocityField w;
  };

  /// Requires the reference triangulation to refine q's partition.
  Application apply(const PressureField& q) const;
  double norm(const PressureField& q) const { return apply(q).norm; }

  const Partition& base() const { return base_; }
  const Triangulation& reference() const { return reference_; }
  const std::shared_ptr<const VelocitySpace>& space() const { return solver_.space(); }
  const VelocitySolver& solver() const { return solver_; }
  int depth() const { return depth_; }

private:
  Partition base_;
  Triangulation reference_;
  int depth_;
  VelocitySolver solver_;
};

SchurSurrogate::Application schur_apply(const PressureField& q, const SchurSurrogate& s);

/// Power-iteration estimate of ||I - alpha Pi_P S|| on zero-mean pressures of
/// the surrogate's base partition (L2 inner product). Throws
/// std::runtime_error with the estimate trace when the iteration has not
/// settled after `iters` steps.
double richardson_contraction_estimate(double alpha, const SchurSurrogate& s, int iters = 200,
                                       std::uint64_t seed = 1);
/// Same estimate for ||Pi_P S||.
double schur_norm_estimate(const SchurSurrogate& s, int iters = 200, std::uint64_t seed = 1);

/// L2 projection of a pressure onto piecewise constants of a coarser partition.
PressureField l2_project(const PressureField& q, const Partition& coarse);

/// Direct solution of the reduced Stokes problem on V(T_ref) x P(P).
struct ReducedSolution {
  VelocityField u;
  PressureField p;
};
ReducedSolution solve_reduced_stokes(const VelocitySolver& ref_solver, const Partition& pressure_partition);

}  // namespace uzawa
