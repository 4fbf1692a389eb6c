#include "polymoment/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "polymoment/errors.hpp"

namespace polymoment {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ArgumentError("solver: tol must be positive");
  if (!(feasibility_tol > 0.0)) throw ArgumentError("solver: feasibility_tol must be positive");
  if (max_outer < 1 || max_inner < 1) throw ArgumentError("solver: iteration limits must be positive");
  if (!(initial_penalty > 0.0)) throw ArgumentError("solver: initial penalty must be positive");
  if (!(penalty_growth > 1.0)) throw ArgumentError("solver: penalty growth must exceed 1");
  if (!(feasibility_improvement_ratio > 0.0 && feasibility_improvement_ratio < 1.0)) {
    throw ArgumentError("solver: feasibility improvement ratio must lie in (0,1)");
  }
  if (max_restarts < 0) throw ArgumentError("solver: max_restarts must be nonnegative");
  if (lbfgs_memory < 1) throw ArgumentError("solver: L-BFGS memory must be positive");
  if (!(max_penalty >= initial_penalty)) throw ArgumentError("solver: penalty cap below start");
  if (stall_outer_iterations < 1) throw ArgumentError("solver: stall window must be positive");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::RestartExhausted: return "RestartExhausted";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

Box Box::uniform(int n, double lo, double hi) {
  return Box{Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi)};
}

Eigen::VectorXd Box::project(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 50;
constexpr double kMultiplierCap = 1e10;
constexpr double kDivergenceFactor = 1e3;

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const std::optional<Box>& box) {
  if (!box) return g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  return x.size() ? (box->project(x - g) - x).lpNorm<Eigen::Infinity>() : 0.0;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Augmented Lagrangian merit f + lambda^T c + rho/2 |c|^2 and its gradient.
class Merit {
 public:
  Merit(const NlpProblem& nlp, const Eigen::VectorXd& lambda, double rho)
      : nlp_(nlp), lambda_(lambda), rho_(rho) {}

  // Returns +inf (and leaves grad unspecified) when evaluation is non-finite.
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    try {
      const double f = nlp_.objective(x);
      nlp_.constraints(x, c_);
      if (!std::isfinite(f) || !c_.allFinite()) return std::numeric_limits<double>::infinity();
      nlp_.objective_gradient(x, grad);
      w_ = lambda_ + rho_ * c_;
      nlp_.constraint_jacobian_transpose_product(x, w_, jtw_);
      grad += jtw_;
      violation_ = c_.size() ? c_.lpNorm<Eigen::Infinity>() : 0.0;
      const double value = f + lambda_.dot(c_) + 0.5 * rho_ * c_.squaredNorm();
      if (!std::isfinite(value) || !grad.allFinite()) {
        return std::numeric_limits<double>::infinity();
      }
      return value;
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  // max|c| at the most recent evaluation
  double violation() const noexcept { return violation_; }

 private:
  const NlpProblem& nlp_;
  const Eigen::VectorXd& lambda_;
  double rho_;
  double violation_ = 0.0;
  Eigen::VectorXd c_, w_, jtw_;
};

enum class InnerOutcome { Tolerance, IterationLimit, LineSearchFailure, Diverged, NumericFailure };

struct InnerResult {
  InnerOutcome outcome = InnerOutcome::IterationLimit;
  int iterations = 0;
};

class LbfgsMemory {
 public:
  explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

  void clear() { s_.clear(), y_.clear(), rho_.clear(); }
  bool empty() const { return s_.empty(); }

  void push(Eigen::VectorXd s, Eigen::VectorXd y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;  // curvature condition
    if (static_cast<int>(s_.size()) == capacity_) {
      s_.pop_front(), y_.pop_front(), rho_.pop_front();
    }
    rho_.push_back(1.0 / sy);
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
  }

  // Two-loop recursion: returns H q.
  Eigen::VectorXd apply(const Eigen::VectorXd& q_in) const {
    Eigen::VectorXd q = q_in;
    const int m = static_cast<int>(s_.size());
    std::vector<double> alpha(m);
    for (int k = m - 1; k >= 0; --k) {
      alpha[k] = rho_[k] * s_[k].dot(q);
      q -= alpha[k] * y_[k];
    }
    if (m > 0) q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (int k = 0; k < m; ++k) {
      const double beta = rho_[k] * y_[k].dot(q);
      q += (alpha[k] - beta) * s_[k];
    }
    return q;
  }

 private:
  int capacity_;
  std::deque<Eigen::VectorXd> s_, y_;
  std::deque<double> rho_;
};

InnerResult minimize_merit(Merit& merit, Eigen::VectorXd& x, double omega, int max_inner,
                           const std::optional<Box>& box, int memory, int outer,
                           const InnerStepObserver& observer) {
  InnerResult result;
  Eigen::VectorXd g;
  double value = merit.eval(x, g);
  if (!std::isfinite(value)) {
    result.outcome = InnerOutcome::NumericFailure;
    return result;
  }
  // The merit of a nonconvex polynomial problem can be unbounded below for small rho;
  // iterates that run far from feasibility are abandoned.
  const double divergence_limit = kDivergenceFactor * std::max(1.0, merit.violation());
  LbfgsMemory hist(memory);
  Eigen::VectorXd gt, xt, d;
  for (int it = 0; it < max_inner; ++it) {
    if (projected_gradient_norm(x, g, box) <= omega) {
      result.outcome = InnerOutcome::Tolerance;
      return result;
    }
    // Variables held at a bound by the gradient are frozen for this step.
    Eigen::VectorXd q = g;
    std::vector<char> active;
    if (box) {
      active.assign(x.size(), 0);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if ((x[i] <= box->lower[i] && g[i] > 0.0) || (x[i] >= box->upper[i] && g[i] < 0.0)) {
          active[i] = 1;
          q[i] = 0.0;
        }
      }
    }
    d = -hist.apply(q);
    if (box) {
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (active[i]) d[i] = 0.0;
      }
    }
    if (!(g.dot(d) < 0.0) || !d.allFinite()) {
      hist.clear();
      d = -q;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      if (hist.empty()) step = std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300));
      for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= kBacktrack) {
        xt = x + step * d;
        if (box) xt = box->project(xt);
        const double decrease = g.dot(xt - x);
        if (!(decrease < 0.0)) continue;
        const double vt = merit.eval(xt, gt);
        if (vt <= value + kArmijoC1 * decrease && vt <= value) {
          if (observer) observer({outer, result.iterations, value, vt});
          hist.push(xt - x, gt - g);
          x.swap(xt);
          g.swap(gt);
          value = vt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (hist.empty()) break;
        hist.clear();  // retry along the (projected) steepest descent direction
        d = -q;
      }
    }
    ++result.iterations;
    if (!accepted) {
      result.outcome = InnerOutcome::LineSearchFailure;
      return result;
    }
    if (merit.violation() > divergence_limit) {
      result.outcome = InnerOutcome::Diverged;
      return result;
    }
  }
  result.outcome = projected_gradient_norm(x, g, box) <= omega ? InnerOutcome::Tolerance
                                                                : InnerOutcome::IterationLimit;
  return result;
}

struct AttemptResult {
  SolveStatus status = SolveStatus::NumericFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  double objective = 0.0;
  double violation = std::numeric_limits<double>::infinity();
  double stationarity = std::numeric_limits<double>::infinity();
  int outer = 0;
  int inner = 0;
};

AttemptResult run_attempt(const NlpProblem& nlp, Eigen::VectorXd x, const std::optional<Box>& box,
                          const SolverConfig& cfg, const InnerStepObserver& observer) {
  AttemptResult res;
  if (box) x = box->project(x);
  const int m = nlp.num_constraints();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd c;
  double rho = cfg.initial_penalty;
  double omega = std::max(cfg.tol, 1.0);
  int stall = 0;

  double prev_violation = std::numeric_limits<double>::infinity();
  try {
    nlp.constraints(x, c);
    if (c.allFinite()) prev_violation = m ? c.lpNorm<Eigen::Infinity>() : 0.0;
  } catch (const NumericError&) {
  }

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    res.outer = outer;
    Merit merit(nlp, lambda, rho);
    const Eigen::VectorXd x_outer = x;
    const InnerResult inner =
        minimize_merit(merit, x, omega, cfg.max_inner, box, cfg.lbfgs_memory, outer, observer);
    res.inner += inner.iterations;
    res.x = x;
    res.lambda = lambda;
    if (inner.outcome == InnerOutcome::NumericFailure) {
      res.status = SolveStatus::NumericFailure;
      return res;
    }
    if (inner.outcome == InnerOutcome::Diverged) {
      // back to the outer iterate with a stiffer penalty
      x = x_outer;
      res.x = x;
      if (rho >= cfg.max_penalty) {
        res.status = SolveStatus::NumericFailure;
        return res;
      }
      rho = std::min(rho * cfg.penalty_growth, cfg.max_penalty);
      continue;
    }

    nlp.rebalance(x, lambda);
    nlp.constraints(x, c);
    const double violation = m ? c.lpNorm<Eigen::Infinity>() : 0.0;
    lambda = (lambda + rho * c).cwiseMax(-kMultiplierCap).cwiseMin(kMultiplierCap);
    const KktResidual kkt = kkt_residual(nlp, x, lambda, 0.0, box);

    res.x = x;
    res.lambda = lambda;
    res.objective = nlp.objective(x);
    res.violation = violation;
    res.stationarity = kkt.stationarity;
    if (!std::isfinite(res.objective) || !std::isfinite(violation)) {
      res.status = SolveStatus::NumericFailure;
      return res;
    }
    if (violation <= cfg.feasibility_tol && kkt.stationarity <= cfg.tol) {
      res.status = SolveStatus::Converged;
      return res;
    }

    // an inner solve cut short by the iteration limit keeps its penalty, and so does one
    // that is already feasible (only stationarity is missing)
    const bool inner_done = inner.outcome != InnerOutcome::IterationLimit;
    if (inner_done && violation > cfg.feasibility_tol &&
        violation > cfg.feasibility_improvement_ratio * prev_violation) {
      if (rho * cfg.penalty_growth <= cfg.max_penalty) {
        rho *= cfg.penalty_growth;
        stall = 0;
      } else if (rho < cfg.max_penalty) {
        rho = cfg.max_penalty;
      } else if (violation >= prev_violation && ++stall >= cfg.stall_outer_iterations) {
        res.status = SolveStatus::NumericFailure;
        return res;
      }
    } else {
      stall = 0;
    }
    prev_violation = violation;
    omega = std::max(cfg.tol, 0.1 * omega);
  }
  res.status = SolveStatus::IterationLimit;
  return res;
}

}  // namespace

KktResidual kkt_residual(const NlpProblem& nlp, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& lambda, double rho, const std::optional<Box>& box) {
  if (x.size() != nlp.num_variables()) throw ArgumentError("kkt_residual: x has the wrong length");
  if (lambda.size() != nlp.num_constraints()) {
    throw ArgumentError("kkt_residual: multiplier vector has the wrong length");
  }
  KktResidual r;
  Eigen::VectorXd c, g, jtw;
  nlp.constraints(x, c);
  r.feasibility = c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;
  nlp.objective_gradient(x, g);
  nlp.constraint_jacobian_transpose_product(x, lambda + rho * c, jtw);
  r.stationarity = projected_gradient_norm(x, g + jtw, box);
  return r;
}

SolveReport solve(const NlpProblem& nlp, const Eigen::VectorXd& x0, const std::optional<Box>& box,
                  const SolverConfig& cfg, const Reinitializer& reinit,
                  const InnerStepObserver& observer) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const int n = nlp.num_variables();
  if (x0.size() != n) throw ArgumentError("solve: x0 has the wrong length");
  if (box) {
    if (box->lower.size() != n || box->upper.size() != n) {
      throw ArgumentError("solve: box bounds have the wrong length");
    }
    if (!box->lower.allFinite() || !box->upper.allFinite() ||
        (box->lower.array() > box->upper.array()).any()) {
      throw ArgumentError("solve: box bounds must be finite and ordered");
    }
  }

  SolveReport report;
  auto finish = [&](SolveReport& r) -> SolveReport& {
    r.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };

  double f0 = std::numeric_limits<double>::quiet_NaN();
  try {
    f0 = nlp.objective(box ? box->project(x0) : x0);
  } catch (const NumericError&) {
  }
  if (!std::isfinite(f0)) {
    report.status = SolveStatus::NumericFailure;
    report.x = x0;
    report.objective = f0;
    return finish(report);
  }

  Eigen::VectorXd start_point = x0;
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    if (attempt > 0) {
      const std::uint64_t s = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(attempt)));
      if (reinit) {
        start_point = reinit(s);
      } else {
        std::mt19937_64 rng(s);
        std::normal_distribution<double> noise(0.0, 0.1);
        start_point = x0;
        for (Eigen::Index i = 0; i < n; ++i) start_point[i] += noise(rng);
      }
      ++report.restarts;
    }
    AttemptResult a = run_attempt(nlp, start_point, box, cfg, observer);
    report.outer_iterations += a.outer;
    report.inner_iterations += a.inner;
    // a failed attempt only replaces an earlier one that was less feasible
    const bool better = attempt == 0 || a.status == SolveStatus::Converged ||
                        (std::isfinite(a.violation) && !(a.violation >= report.max_violation));
    if (!better) continue;
    report.x = std::move(a.x);
    report.multipliers = std::move(a.lambda);
    report.objective = a.objective;
    report.max_violation = a.violation;
    report.stationarity = a.stationarity;
    report.status = a.status;
    if (a.status == SolveStatus::Converged) return finish(report);
  }
  if (cfg.max_restarts > 0) report.status = SolveStatus::RestartExhausted;
  return finish(report);
}

}  // namespace polymoment
