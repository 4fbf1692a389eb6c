#include "polymoment/poly.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "polymoment/errors.hpp"

namespace polymoment {

int total_degree(const MultiIndex& n) { return std::accumulate(n.begin(), n.end(), 0); }

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace {

void check_same_dimension(const SparsePoly& a, const SparsePoly& b, const char* op) {
  if (a.dimension() != b.dimension()) {
    throw ArgumentError(std::string(op) + ": dimension mismatch (" +
                        std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()) +
                        ")");
  }
}

void add_into(SparsePoly::TermMap& acc, const MultiIndex& n, double c) {
  auto [it, inserted] = acc.try_emplace(n, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) acc.erase(it);
  }
}

double monomial(const MultiIndex& n, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    for (int e = 0; e < n[i]; ++e) v *= x[i];
  }
  return v;
}

}  // namespace

SparsePoly::SparsePoly(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw ArgumentError("polynomial dimension must be positive");
}

SparsePoly::SparsePoly(int dimension, TermMap terms) : SparsePoly(dimension) {
  for (auto& [n, c] : terms) {
    if (static_cast<int>(n.size()) != dimension) {
      throw ArgumentError("multi-index length " + std::to_string(n.size()) +
                          " does not match dimension " + std::to_string(dimension));
    }
    if (std::any_of(n.begin(), n.end(), [](int e) { return e < 0; })) {
      throw ArgumentError("negative exponent in multi-index");
    }
    if (c != 0.0) terms_.emplace(n, c);
  }
}

SparsePoly SparsePoly::constant(int dimension, double value) {
  TermMap t;
  t.emplace(MultiIndex(dimension, 0), value);
  return SparsePoly(dimension, std::move(t));
}

SparsePoly SparsePoly::variable(int dimension, int var) {
  if (var < 0 || var >= dimension) throw ArgumentError("variable index out of range");
  MultiIndex n(dimension, 0);
  n[var] = 1;
  TermMap t;
  t.emplace(std::move(n), 1.0);
  return SparsePoly(dimension, std::move(t));
}

int SparsePoly::degree() const {
  int d = 0;
  for (const auto& [n, c] : terms_) d = std::max(d, total_degree(n));
  return d;
}

int SparsePoly::max_exponent() const {
  int m = 0;
  for (const auto& [n, c] : terms_) {
    for (int e : n) m = std::max(m, e);
  }
  return m;
}

double SparsePoly::coefficient(const MultiIndex& n) const {
  auto it = terms_.find(n);
  return it == terms_.end() ? 0.0 : it->second;
}

std::vector<int> SparsePoly::variables() const {
  std::vector<bool> seen(dimension_, false);
  for (const auto& [n, c] : terms_) {
    for (int i = 0; i < dimension_; ++i) seen[i] = seen[i] || n[i] > 0;
  }
  std::vector<int> out;
  for (int i = 0; i < dimension_; ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

SparsePoly SparsePoly::operator-() const {
  SparsePoly r(dimension_);
  r.terms_ = terms_;
  for (auto& [n, c] : r.terms_) c = -c;
  return r;
}

SparsePoly operator+(const SparsePoly& a, const SparsePoly& b) {
  check_same_dimension(a, b, "add");
  SparsePoly r = a;
  for (const auto& [n, c] : b.terms_) add_into(r.terms_, n, c);
  return r;
}

SparsePoly operator-(const SparsePoly& a, const SparsePoly& b) { return a + (-b); }

SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) { return multiply(a, b); }

SparsePoly operator*(double s, const SparsePoly& p) {
  SparsePoly r(p.dimension_);
  if (s == 0.0) return r;
  for (const auto& [n, c] : p.terms_) {
    const double v = s * c;
    if (v != 0.0) r.terms_.emplace(n, v);
  }
  return r;
}

SparsePoly operator+(const SparsePoly& p, double c) {
  return p + SparsePoly::constant(p.dimension(), c);
}

SparsePoly operator-(const SparsePoly& p, double c) {
  return p + SparsePoly::constant(p.dimension(), -c);
}

SparsePoly SparsePoly::embed(int new_dimension) const {
  if (new_dimension < dimension_) throw ArgumentError("embed: cannot shrink dimension");
  TermMap t;
  for (const auto& [n, c] : terms_) {
    MultiIndex m = n;
    m.resize(new_dimension, 0);
    t.emplace(std::move(m), c);
  }
  return SparsePoly(new_dimension, std::move(t));
}

std::string SparsePoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [n, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (int i = 0; i < dimension_; ++i) {
      if (n[i] == 1) os << "*x" << (i + 1);
      if (n[i] > 1) os << "*x" << (i + 1) << "^" << n[i];
    }
  }
  return os.str();
}

double eval(const SparsePoly& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.dimension()) {
    throw ArgumentError("eval: point has length " + std::to_string(x.size()) +
                        ", polynomial dimension is " + std::to_string(p.dimension()));
  }
  double sum = 0.0;
  for (const auto& [n, c] : p.terms()) sum += c * monomial(n, x);
  return sum;
}

double eval_gradient(const SparsePoly& p, std::span<const double> x, std::span<double> grad) {
  const int dim = p.dimension();
  if (static_cast<int>(x.size()) != dim || static_cast<int>(grad.size()) != dim) {
    throw ArgumentError("eval_gradient: length mismatch");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  double sum = 0.0;
  for (const auto& [n, c] : p.terms()) {
    sum += c * monomial(n, x);
    for (int i = 0; i < dim; ++i) {
      if (n[i] == 0) continue;
      double v = c * n[i];
      for (int j = 0; j < dim; ++j) {
        const int e = (j == i) ? n[j] - 1 : n[j];
        for (int k = 0; k < e; ++k) v *= x[j];
      }
      grad[i] += v;
    }
  }
  return sum;
}

SparsePoly multiply(const SparsePoly& a, const SparsePoly& b) {
  check_same_dimension(a, b, "multiply");
  const int dim = a.dimension();
  SparsePoly::TermMap acc;
  MultiIndex n(dim);
  for (const auto& [na, ca] : a.terms()) {
    for (const auto& [nb, cb] : b.terms()) {
      for (int i = 0; i < dim; ++i) n[i] = na[i] + nb[i];
      add_into(acc, n, ca * cb);
    }
  }
  return SparsePoly(dim, std::move(acc));
}

SparsePoly square_to_gamma(const SparsePoly& g) {
  if (g.is_zero()) {
    throw DegenerateInputError("square_to_gamma: zero constraint polynomial (drop 0 = 0 upstream)");
  }
  return multiply(g, g);
}

ProblemSpec::ProblemSpec(int dimension, SparsePoly objective, std::vector<SparsePoly> equalities,
                         std::vector<SparsePoly> inequalities)
    : dimension_(dimension), objective_(std::move(objective)) {
  if (dimension < 1) throw ArgumentError("problem dimension must be positive");
  if (objective_.dimension() != dimension) {
    throw ArgumentError("objective dimension does not match problem dimension");
  }
  for (std::size_t j = 0; j < equalities.size(); ++j) {
    if (equalities[j].dimension() != dimension) {
      throw ArgumentError("equality " + std::to_string(j) + " has the wrong dimension");
    }
    if (equalities[j].is_zero()) {
      std::cerr << "warning: dropping zero equality constraint " << j << "\n";
      continue;
    }
    equalities_.push_back(std::move(equalities[j]));
  }
  for (std::size_t k = 0; k < inequalities.size(); ++k) {
    if (inequalities[k].dimension() != dimension) {
      throw ArgumentError("inequality " + std::to_string(k) + " has the wrong dimension");
    }
  }
  inequalities_ = std::move(inequalities);
}

int ProblemSpec::degree() const {
  int d = objective_.degree();
  for (const auto& g : equalities_) d = std::max(d, g.degree());
  for (const auto& h : inequalities_) d = std::max(d, h.degree());
  return std::max(d, 1);
}

double slack_scale(const SparsePoly& h) {
  double s = 0.0;
  for (const auto& [n, c] : h.terms()) s += std::abs(c);
  return std::sqrt(s);
}

ProblemSpec slackify(const ProblemSpec& problem) {
  const auto& ineq = problem.inequalities();
  if (ineq.empty()) return problem;
  const int dim = problem.dimension();
  const int new_dim = dim + static_cast<int>(ineq.size());

  std::vector<SparsePoly> eqs;
  eqs.reserve(problem.equalities().size() + ineq.size());
  for (const auto& g : problem.equalities()) eqs.push_back(g.embed(new_dim));
  for (std::size_t k = 0; k < ineq.size(); ++k) {
    // s_k^2 directly, avoiding the rounding of sqrt-then-square.
    double s2 = 0.0;
    for (const auto& [m, c] : ineq[k].terms()) s2 += std::abs(c);
    MultiIndex n(new_dim, 0);
    n[dim + k] = 2;
    SparsePoly::TermMap slack_term;
    slack_term.emplace(std::move(n), s2);
    eqs.push_back(ineq[k].embed(new_dim) - SparsePoly(new_dim, std::move(slack_term)));
  }
  return ProblemSpec(new_dim, problem.objective().embed(new_dim), std::move(eqs));
}

}  // namespace polymoment
