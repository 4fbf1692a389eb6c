#pragma once

#include <optional>
#include <vector>

#include "polymoment/moments.hpp"
#include "polymoment/poly.hpp"

namespace polymoment {

struct RecoveredSolution {
  std::vector<double> location;
  double value = 0.0;                  // eval(objective, location)
  std::vector<double> component_mass;  // alpha^(l) = prod_i mu^(l)_{i,0}
  double max_equality_violation = 0.0;
  int component = 0;                   // 0-based index of the component read
};

/// Reads the minimizer from the dominant mixture component: l* = argmax |alpha^(l)|
/// (lowest index on ties), x_i = mu^{(l*)}_{i,1} / mu^{(l*)}_{i,0}, clamped to [-1,1].
/// With `polish`, up to 5 projected-gradient steps on sum_j g_j(x)^2 tighten feasibility.
/// Throws DegenerateSolutionError when every |alpha^(l)| < 1e-8.
RecoveredSolution recover_location(const MomentView& mu, const ProblemSpec& problem,
                                   bool polish = false);

/// |value - reference| / max(1, |reference|)
double relative_error(double value, double reference);

struct CandidateReport {
  bool feasible = false;        // max_j |g_j(x)| <= tol and every h_k(x) >= -tol
  double max_violation = 0.0;
  bool in_box = false;
  double box_violation = 0.0;   // max_i max(|x_i| - 1, 0)
  double value = 0.0;
  std::optional<double> relative_error;
};

CandidateReport verify_candidate(const ProblemSpec& problem, const std::vector<double>& x,
                                 double tol_feas, std::optional<double> reference = std::nullopt);

struct GridMinimum {
  double value = 0.0;
  std::vector<double> location;
  long long points_kept = 0;
};

/// Minimum of the objective over the uniform grid on [-1,1]^D, keeping points whose
/// constraint violation is at most `band`. Requires D <= 4 and points^D <= 1e8.
/// Throws BandTooTightError if no grid point is kept.
GridMinimum brute_force_grid(const ProblemSpec& problem, int points_per_axis, double band);

/// Same scan over an explicit per-axis candidate set (Cartesian product).
GridMinimum brute_force_grid(const ProblemSpec& problem,
                             const std::vector<std::vector<double>>& axis_values, double band);

/// Feasible points of a problem whose equalities are each univariate: real roots in
/// [-1,1] per axis (grid sign changes refined by bisection to 1e-12), then their
/// Cartesian product. Throws NotSeparableError for coupled constraints or free axes.
std::vector<std::vector<double>> enumerate_separable(const ProblemSpec& problem);

}  // namespace polymoment
