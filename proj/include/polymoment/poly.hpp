#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace polymoment {

/// Exponent tuple addressing one monomial x^n = prod_i x_i^{n_i}.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& n);

/// Graded lexicographic order: total degree first, then lexicographic on the exponents.
/// Used for every term container so evaluation and serialization are deterministic.
struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// Sparse multivariate polynomial in the monomial basis with real coefficients.
///
/// Only nonzero coefficients are stored and every key has length dimension().
/// Instances are immutable once built; arithmetic returns new polynomials.
class SparsePoly {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLexLess>;

  explicit SparsePoly(int dimension);
  /// Validates key lengths and exponents; zero coefficients are dropped.
  SparsePoly(int dimension, TermMap terms);

  static SparsePoly constant(int dimension, double value);
  /// The coordinate polynomial x_var (0-based).
  static SparsePoly variable(int dimension, int var);

  int dimension() const noexcept { return dimension_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Max total degree over the support; 0 for the zero polynomial.
  int degree() const;
  /// Largest exponent of any single variable.
  int max_exponent() const;
  double coefficient(const MultiIndex& n) const;
  /// 0-based indices of variables appearing with a positive exponent.
  std::vector<int> variables() const;

  SparsePoly operator-() const;
  friend SparsePoly operator+(const SparsePoly& a, const SparsePoly& b);
  friend SparsePoly operator-(const SparsePoly& a, const SparsePoly& b);
  friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b);
  friend SparsePoly operator*(double s, const SparsePoly& p);
  friend SparsePoly operator+(const SparsePoly& p, double c);
  friend SparsePoly operator-(const SparsePoly& p, double c);

  friend bool operator==(const SparsePoly& a, const SparsePoly& b) = default;

  /// Same polynomial viewed in a larger ambient dimension (new variables do not appear).
  SparsePoly embed(int new_dimension) const;

  std::string to_string() const;

 private:
  int dimension_;
  TermMap terms_;
};

double eval(const SparsePoly& p, std::span<const double> x);

/// Writes grad p(x) into `grad` (length dimension) and returns p(x).
double eval_gradient(const SparsePoly& p, std::span<const double> x, std::span<double> grad);

SparsePoly multiply(const SparsePoly& a, const SparsePoly& b);

/// Coefficients of g^2, the polynomial whose moments pin a measure to {g = 0}.
SparsePoly square_to_gamma(const SparsePoly& g);

/// min p(x) over [-1,1]^D subject to g_j(x) = 0 and h_k(x) >= 0.
class ProblemSpec {
 public:
  /// Zero equality constraints are dropped with a warning on stderr.
  ProblemSpec(int dimension, SparsePoly objective, std::vector<SparsePoly> equalities = {},
              std::vector<SparsePoly> inequalities = {});

  int dimension() const noexcept { return dimension_; }
  const SparsePoly& objective() const noexcept { return objective_; }
  const std::vector<SparsePoly>& equalities() const noexcept { return equalities_; }
  const std::vector<SparsePoly>& inequalities() const noexcept { return inequalities_; }

  /// Problem degree: max degree over objective and all constraints, at least 1.
  int degree() const;

  friend bool operator==(const ProblemSpec& a, const ProblemSpec& b) = default;

 private:
  int dimension_;
  SparsePoly objective_;
  std::vector<SparsePoly> equalities_;
  std::vector<SparsePoly> inequalities_;
};

/// Rescaling s_k = sqrt(sum_n |h_n|) that keeps the slack of h >= 0 inside [-1,1].
double slack_scale(const SparsePoly& h);

/// Rewrites each h_k(x) >= 0 as h_k(x) - (s_k y_k)^2 = 0 with a new coordinate y_k
/// appended after the original D coordinates. Returns the input unchanged when K = 0.
ProblemSpec slackify(const ProblemSpec& problem);

}  // namespace polymoment
