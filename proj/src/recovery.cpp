#include "polymoment/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "polymoment/errors.hpp"

namespace polymoment {

namespace {

double max_equality_violation(const ProblemSpec& problem, std::span<const double> x) {
  double v = 0.0;
  for (const auto& g : problem.equalities()) v = std::max(v, std::abs(eval(g, x)));
  return v;
}

double constraint_violation(const ProblemSpec& problem, std::span<const double> x) {
  double v = max_equality_violation(problem, x);
  for (const auto& h : problem.inequalities()) v = std::max(v, -eval(h, x));
  return v;
}

// Projected gradient steps on 0.5 * sum_j g_j(x)^2 over the box.
void polish_feasibility(const ProblemSpec& problem, std::vector<double>& x) {
  const int dim = problem.dimension();
  auto merit = [&](std::span<const double> p, std::vector<double>* grad) {
    double m = 0.0;
    std::vector<double> gg(dim);
    if (grad) grad->assign(dim, 0.0);
    for (const auto& g : problem.equalities()) {
      const double v = grad ? eval_gradient(g, p, gg) : eval(g, p);
      m += 0.5 * v * v;
      if (grad) {
        for (int i = 0; i < dim; ++i) (*grad)[i] += v * gg[i];
      }
    }
    return m;
  };
  std::vector<double> grad, trial(dim);
  for (int step = 0; step < 5; ++step) {
    const double m0 = merit(x, &grad);
    if (m0 == 0.0) return;
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      for (int i = 0; i < dim; ++i) trial[i] = std::clamp(x[i] - t * grad[i], -1.0, 1.0);
      if (merit(trial, nullptr) < m0) {
        x = trial;
        moved = true;
        break;
      }
    }
    if (!moved) return;
  }
}

}  // namespace

double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

RecoveredSolution recover_location(const MomentView& mu, const ProblemSpec& problem, bool polish) {
  if (mu.dimension() != problem.dimension()) {
    throw ArgumentError("recover_location: moment dimension does not match the problem");
  }
  if (mu.degree() < 1) throw ArgumentError("recover_location: need first moments");
  const int L = mu.components();
  const int D = mu.dimension();
  RecoveredSolution sol;
  sol.component_mass.resize(L);
  int best = -1;
  double best_mass = 0.0;
  for (int l = 0; l < L; ++l) {
    double alpha = 1.0;
    for (int i = 0; i < D; ++i) alpha *= mu(l, i, 0);
    sol.component_mass[l] = alpha;
    if (std::abs(alpha) > best_mass) {  // strict: ties keep the lowest index
      best_mass = std::abs(alpha);
      best = l;
    }
  }
  if (best < 0 || best_mass < 1e-8) {
    throw DegenerateSolutionError("recover_location: every mixture component has negligible mass");
  }
  sol.component = best;
  sol.location.resize(D);
  for (int i = 0; i < D; ++i) {
    const double x = mu(best, i, 1) / mu(best, i, 0);
    sol.location[i] = std::clamp(x, -1.0, 1.0);
  }
  if (polish) polish_feasibility(problem, sol.location);
  sol.value = eval(problem.objective(), sol.location);
  sol.max_equality_violation = max_equality_violation(problem, sol.location);
  return sol;
}

CandidateReport verify_candidate(const ProblemSpec& problem, const std::vector<double>& x,
                                 double tol_feas, std::optional<double> reference) {
  if (static_cast<int>(x.size()) != problem.dimension()) {
    throw ArgumentError("verify_candidate: point has the wrong length");
  }
  CandidateReport r;
  r.max_violation = constraint_violation(problem, x);
  r.feasible = r.max_violation <= tol_feas;
  for (double xi : x) r.box_violation = std::max(r.box_violation, std::abs(xi) - 1.0);
  r.in_box = r.box_violation <= 0.0;
  r.box_violation = std::max(r.box_violation, 0.0);
  r.value = eval(problem.objective(), x);
  if (reference) r.relative_error = relative_error(r.value, *reference);
  return r;
}

GridMinimum brute_force_grid(const ProblemSpec& problem, int points_per_axis, double band) {
  if (points_per_axis < 2) throw ArgumentError("brute_force_grid: need at least 2 points per axis");
  std::vector<double> axis(points_per_axis);
  for (int k = 0; k < points_per_axis; ++k) {
    axis[k] = -1.0 + 2.0 * k / (points_per_axis - 1);
  }
  return brute_force_grid(problem, std::vector<std::vector<double>>(problem.dimension(), axis),
                          band);
}

GridMinimum brute_force_grid(const ProblemSpec& problem,
                             const std::vector<std::vector<double>>& axis_values, double band) {
  const int D = problem.dimension();
  if (static_cast<int>(axis_values.size()) != D) {
    throw ArgumentError("brute_force_grid: need one candidate list per axis");
  }
  if (D > 4) throw ArgumentError("brute_force_grid: dimension above 4 is not supported");
  double total = 1.0;
  for (const auto& a : axis_values) {
    if (a.empty()) throw ArgumentError("brute_force_grid: empty axis candidate list");
    total *= static_cast<double>(a.size());
  }
  if (total > 1e8) throw ArgumentError("brute_force_grid: more than 1e8 grid points");
  const long long count = static_cast<long long>(total);

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    long long index = -1;
    long long kept = 0;
  };
  auto point_at = [&](long long flat, std::vector<double>& x) {
    // last axis varies fastest, so flat order is lexicographic order
    for (int i = D - 1; i >= 0; --i) {
      const long long n = static_cast<long long>(axis_values[i].size());
      x[i] = axis_values[i][flat % n];
      flat /= n;
    }
  };
  auto scan = [&](long long begin, long long end, Best& best) {
    std::vector<double> x(D);
    for (long long f = begin; f < end; ++f) {
      point_at(f, x);
      if (constraint_violation(problem, x) > band) continue;
      ++best.kept;
      const double v = eval(problem.objective(), x);
      if (v < best.value) {
        best.value = v;
        best.index = f;
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const long long workers = std::min<long long>(hw, std::max<long long>(1, count / 4096));
  std::vector<Best> partial(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> threads;
    for (long long w = 0; w < workers; ++w) {
      const long long b = count * w / workers;
      const long long e = count * (w + 1) / workers;
      threads.emplace_back([&, b, e, w] { scan(b, e, partial[w]); });
    }
  }
  Best best;
  for (const Best& p : partial) {
    best.kept += p.kept;
    if (p.index >= 0 && (p.value < best.value || (p.value == best.value && p.index < best.index))) {
      best.value = p.value;
      best.index = p.index;
    }
  }
  if (best.index < 0) {
    throw BandTooTightError("brute_force_grid: no grid point within constraint band " +
                            std::to_string(band));
  }
  GridMinimum out;
  out.value = best.value;
  out.location.resize(D);
  point_at(best.index, out.location);
  out.points_kept = best.kept;
  return out;
}

std::vector<std::vector<double>> enumerate_separable(const ProblemSpec& problem) {
  const int D = problem.dimension();
  if (!problem.inequalities().empty()) {
    throw NotSeparableError("enumerate_separable: inequality constraints are not supported");
  }
  std::vector<std::vector<const SparsePoly*>> per_axis(D);
  for (const auto& g : problem.equalities()) {
    const auto vars = g.variables();
    if (vars.size() != 1) {
      throw NotSeparableError("enumerate_separable: constraint " + g.to_string() +
                              " is not univariate");
    }
    per_axis[vars[0]].push_back(&g);
  }

  constexpr int kGrid = 20000;
  std::vector<std::vector<double>> roots(D);
  double total = 1.0;
  for (int i = 0; i < D; ++i) {
    if (per_axis[i].empty()) {
      throw NotSeparableError("enumerate_separable: axis " + std::to_string(i) +
                              " is unconstrained");
    }
    std::vector<double> x(D, 0.0);
    auto g = [&](double t) {
      x[i] = t;
      return eval(*per_axis[i][0], x);
    };
    std::vector<double> found;
    for (int k = 0; k <= kGrid; ++k) {
      const double a = -1.0 + 2.0 * k / kGrid;
      const double ga = g(a);
      if (ga == 0.0) {
        found.push_back(a);
        continue;
      }
      if (k == kGrid) break;
      double b = -1.0 + 2.0 * (k + 1) / kGrid;
      double gb = g(b);
      if (gb == 0.0 || (ga < 0.0) == (gb < 0.0)) continue;
      double lo = a, hi = b, glo = ga;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      found.push_back(0.5 * (lo + hi));
    }
    // remaining univariate constraints on this axis filter the candidates
    std::vector<double> kept;
    for (double r : found) {
      bool ok = true;
      for (std::size_t j = 1; j < per_axis[i].size() && ok; ++j) {
        x[i] = r;
        ok = std::abs(eval(*per_axis[i][j], x)) <= 1e-9;
      }
      if (ok) kept.push_back(r);
    }
    roots[i] = std::move(kept);
    total *= static_cast<double>(roots[i].size());
  }
  if (total * D > 1e7) throw ArgumentError("enumerate_separable: too many feasible points");

  std::vector<std::vector<double>> points;
  if (total == 0.0) return points;
  std::vector<std::size_t> idx(D, 0);
  while (true) {
    std::vector<double> p(D);
    for (int i = 0; i < D; ++i) p[i] = roots[i][idx[i]];
    points.push_back(std::move(p));
    int i = D - 1;
    while (i >= 0 && ++idx[i] == roots[i].size()) idx[i--] = 0;
    if (i < 0) break;
  }
  return points;
}

}  // namespace polymoment
