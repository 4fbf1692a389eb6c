#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "polymoment/moments.hpp"
#include "polymoment/nlp.hpp"
#include "polymoment/poly.hpp"

namespace polymoment {

/// Position of the mu, X and Y blocks inside the flat decision vector.
///
///   mu: L*D*(2d+1) moments, laid out as MomentView expects
///   X:  L*D factors of shape (d+1) x rank_x, row-major
///   Y:  L*D factors of shape d x rank_y, row-major
struct DecisionLayout {
  int dimension = 0;
  int degree = 0;
  int components = 0;
  int num_equalities = 0;
  int rank_x = 0;
  int rank_y = 0;

  std::size_t mu_offset = 0;
  std::size_t mu_size = 0;
  std::size_t x_offset = 0;
  std::size_t x_size = 0;
  std::size_t y_offset = 0;
  std::size_t y_size = 0;
  std::size_t total = 0;

  /// rank_x/rank_y of 0 select full rank (d+1 and d).
  static DecisionLayout make(int dimension, int degree, int components, int num_equalities,
                             int rank_x = 0, int rank_y = 0);

  std::size_t x_block(int l, int i) const noexcept {
    return x_offset + (static_cast<std::size_t>(l) * dimension + i) * (degree + 1) * rank_x;
  }
  std::size_t y_block(int l, int i) const noexcept {
    return y_offset + (static_cast<std::size_t>(l) * dimension + i) * degree * rank_y;
  }

  int hankel_constraints_per_axis() const noexcept { return (degree + 1) * (degree + 2) / 2; }
  int localizing_constraints_per_axis() const noexcept { return degree * (degree + 1) / 2; }
  /// L*D*[(d+1)(d+2)/2 + d(d+1)/2] + J*L + 1
  int num_constraints() const noexcept {
    return components * dimension *
               (hankel_constraints_per_axis() + localizing_constraints_per_axis()) +
           num_equalities * components + 1;
  }
  std::size_t hankel_row(int l, int i) const noexcept {
    return (static_cast<std::size_t>(l) * dimension + i) * hankel_constraints_per_axis();
  }
  std::size_t localizing_row(int l, int i) const noexcept {
    return static_cast<std::size_t>(components) * dimension * hankel_constraints_per_axis() +
           (static_cast<std::size_t>(l) * dimension + i) * localizing_constraints_per_axis();
  }
  std::size_t gamma_row(int j, int l) const noexcept {
    return static_cast<std::size_t>(components) * dimension *
               (hankel_constraints_per_axis() + localizing_constraints_per_axis()) +
           static_cast<std::size_t>(j) * components + l;
  }
  std::size_t normalization_row() const noexcept {
    return static_cast<std::size_t>(num_constraints()) - 1;
  }
};

struct ReformulationOptions {
  int components = 2;
  int rank_x = 0;  // 0: full rank d+1
  int rank_y = 0;  // 0: full rank d
};

/// Burer-Monteiro form of the sum-of-product-measures moment problem:
///
///   min   sum_{n in supp p} p_n phi_n(mu)
///   s.t.  M_d(mu^{(l)}_i)                 = X^{(l)}_i X^{(l)T}_i   (upper triangle)
///         M_{d-1}(mu^{(l)}_i; 1 - t^2)    = Y^{(l)}_i Y^{(l)T}_i   (upper triangle)
///         gamma^{(j)} . phi(mu^{(l)})     = 0                      for all j, l
///         phi_0(mu)                       = 1
///
/// Constraint rows are stacked in exactly that order (Hankel blocks for every (l,i),
/// localizing blocks for every (l,i), gamma rows j-major, normalization last).
class ReformulatedNlp final : public NlpProblem {
 public:
  /// Requires an equality-only problem (slackify first) and options.components >= 1.
  ReformulatedNlp(const ProblemSpec& problem, ReformulationOptions options = {});

  const DecisionLayout& layout() const noexcept { return layout_; }
  const ProblemSpec& problem() const noexcept { return problem_; }
  const std::vector<SparsePoly>& gammas() const noexcept { return gammas_; }

  int num_variables() const override { return static_cast<int>(layout_.total); }
  int num_constraints() const override { return layout_.num_constraints(); }

  double objective(const Eigen::VectorXd& z) const override;
  void objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const override;
  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c) const override;
  void constraint_jacobian_transpose_product(const Eigen::VectorXd& z, const Eigen::VectorXd& v,
                                             Eigen::VectorXd& out) const override;

  /// Per component, rescales axis i by s_i = alpha^(1/D) / mu_{i,0} (product of the s_i
  /// is 1) and its factors by sqrt(s_i), so all zeroth moments of the component agree.
  /// phi and the gamma rows are unchanged; Hankel and localizing rows scale by s_i and
  /// their multipliers by 1/s_i. Components with a zeroth moment <= 1e-12 are skipped.
  void rebalance(Eigen::VectorXd& z, Eigen::VectorXd& lambda) const override;

  /// The mu block of z (no copy; z must outlive the view).
  MomentView moments(const Eigen::VectorXd& z) const;

  /// Decision vector holding `mu` with X, Y set to PSD square roots of the assembled
  /// moment and localizing matrices, eigenvalues clipped from below at `eigen_floor`.
  Eigen::VectorXd encode(const MomentVector& mu, double eigen_floor = 0.0) const;

  /// Deterministic near-feasible random start: each (l,i) is a perturbed Dirac at a
  /// uniform point of [-1,1], rescaled so phi_0 = 1, with PSD square-root factors.
  Eigen::VectorXd initial_point(std::uint64_t seed) const;

 private:
  struct Term {
    MultiIndex exponents;
    double coeff;
  };

  void check_input(const Eigen::VectorXd& z) const;

  ProblemSpec problem_;
  DecisionLayout layout_;
  std::vector<Term> objective_terms_;
  std::vector<SparsePoly> gammas_;
  std::vector<std::vector<Term>> gamma_terms_;
};

/// build(problem, L) with full-rank factors.
ReformulatedNlp build_reformulation(const ProblemSpec& problem, int components);

}  // namespace polymoment
