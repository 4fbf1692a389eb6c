#pragma once

#include <Eigen/Dense>

namespace polymoment {

/// Equality-constrained NLP: min f(x) s.t. c(x) = 0, with first derivatives.
///
/// Implementations are immutable after construction. Outputs are caller-owned buffers
/// (resized as needed), so concurrent evaluation on distinct buffers is safe.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;

  virtual double objective(const Eigen::VectorXd& x) const = 0;
  virtual void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const = 0;
  virtual void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& c) const = 0;
  /// out = J(x)^T v.
  virtual void constraint_jacobian_transpose_product(const Eigen::VectorXd& x,
                                                     const Eigen::VectorXd& v,
                                                     Eigen::VectorXd& out) const = 0;

  /// Optional move along a symmetry of the problem that leaves f unchanged and maps
  /// feasible points to feasible points; `lambda` is updated so lambda^T c(x) is kept.
  /// The solver calls it after every inner solve. Default: no-op.
  virtual void rebalance(Eigen::VectorXd& /*x*/, Eigen::VectorXd& /*lambda*/) const {}
};

}  // namespace polymoment
