#pragma once

#include "polymoment/nlp.hpp"
#include "polymoment/poly.hpp"
#include "polymoment/solver.hpp"

namespace polymoment {

/// The original problem min p(x) s.t. g_j(x) = 0 as an NLP over x in R^D; pair it with
/// hypercube_box() for the [-1,1]^D constraint. Used as the comparison baseline.
class DirectNlp final : public NlpProblem {
 public:
  /// Requires an equality-only problem (slackify first).
  explicit DirectNlp(const ProblemSpec& problem);

  int num_variables() const override { return problem_.dimension(); }
  int num_constraints() const override { return static_cast<int>(problem_.equalities().size()); }

  double objective(const Eigen::VectorXd& x) const override;
  void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const override;
  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& c) const override;
  void constraint_jacobian_transpose_product(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                             Eigen::VectorXd& out) const override;

  Box hypercube_box() const { return Box::uniform(problem_.dimension(), -1.0, 1.0); }

 private:
  ProblemSpec problem_;
};

}  // namespace polymoment
