#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "polymoment/nlp.hpp"

namespace polymoment {

struct SolverConfig {
  /// Tolerance on the projected stationarity residual.
  double tol = 1e-2;
  /// Tolerance on max|c|.
  double feasibility_tol = 1e-4;
  int max_outer = 100;
  int max_inner = 500;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  /// After an inner solve that reaches its tolerance, the penalty grows unless max|c| shrank
  /// to at most this fraction of its previous value.
  double feasibility_improvement_ratio = 0.25;
  int max_restarts = 3;
  std::uint64_t seed = 0;

  int lbfgs_memory = 10;
  double max_penalty = 1e12;
  /// Outer iterations at the penalty cap without feasibility progress before giving up.
  int stall_outer_iterations = 3;

  /// Throws ArgumentError when a field is out of range.
  void validate() const;
};

enum class SolveStatus { Converged, RestartExhausted, IterationLimit, NumericFailure };

std::string to_string(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::NumericFailure;
  double objective = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;
  double max_violation = 0.0;
  double stationarity = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int restarts = 0;
  double wall_time_s = 0.0;
};

/// Finite per-variable bounds.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Box uniform(int n, double lo, double hi);
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

/// Draws a fresh starting point for restart number `attempt` from `seed`.
using Reinitializer = std::function<Eigen::VectorXd(std::uint64_t seed)>;

/// Per accepted inner step: augmented Lagrangian value before and after the step.
struct InnerStepEvent {
  int outer = 0;
  int inner = 0;
  double merit_before = 0.0;
  double merit_after = 0.0;
};
using InnerStepObserver = std::function<void(const InnerStepEvent&)>;

/// Augmented Lagrangian method for min f(x) s.t. c(x) = 0 (optionally x in a box).
///
/// The inner loop minimizes f + lambda^T c + rho/2 |c|^2 with projected L-BFGS and an
/// Armijo backtracking line search; each outer iteration sets lambda <- lambda + rho c and
/// multiplies rho by penalty_growth when max|c| fails to shrink by the improvement ratio.
/// Converged means max|c| <= feasibility_tol and the projected gradient of f + J^T lambda
/// is <= tol. An inner solve whose max|c| grows a thousandfold is discarded and retried
/// from the previous outer iterate with a larger penalty.
///
/// Numeric failures, penalty stalls and iteration limits trigger restarts (up to
/// max_restarts) from `reinit(seed')`, or from a seeded perturbation of x0 when no
/// reinitializer is given. When no attempt converges, the report holds the attempt with
/// the smallest max|c|.
SolveReport solve(const NlpProblem& nlp, const Eigen::VectorXd& x0,
                  const std::optional<Box>& box, const SolverConfig& cfg,
                  const Reinitializer& reinit = {}, const InnerStepObserver& observer = {});

struct KktResidual {
  double stationarity = 0.0;
  double feasibility = 0.0;
};

/// feasibility = max|c(x)|; stationarity = inf-norm of the box-projected gradient of
/// f + J^T (lambda + rho c), i.e. of the augmented Lagrangian.
KktResidual kkt_residual(const NlpProblem& nlp, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& lambda, double rho,
                         const std::optional<Box>& box = std::nullopt);

}  // namespace polymoment
