#include "polymoment/direct.hpp"

#include <span>

#include "polymoment/errors.hpp"

namespace polymoment {

namespace {
std::span<const double> as_span(const Eigen::VectorXd& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}
}  // namespace

DirectNlp::DirectNlp(const ProblemSpec& problem) : problem_(problem) {
  if (!problem.inequalities().empty()) {
    throw UsageError("direct formulation needs an equality-only problem; call slackify first");
  }
}

double DirectNlp::objective(const Eigen::VectorXd& x) const {
  return eval(problem_.objective(), as_span(x));
}

void DirectNlp::objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  grad.resize(x.size());
  eval_gradient(problem_.objective(), as_span(x), {grad.data(), static_cast<std::size_t>(grad.size())});
}

void DirectNlp::constraints(const Eigen::VectorXd& x, Eigen::VectorXd& c) const {
  const auto& eqs = problem_.equalities();
  c.resize(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t j = 0; j < eqs.size(); ++j) c[j] = eval(eqs[j], as_span(x));
}

void DirectNlp::constraint_jacobian_transpose_product(const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& v,
                                                      Eigen::VectorXd& out) const {
  const auto& eqs = problem_.equalities();
  if (v.size() != static_cast<Eigen::Index>(eqs.size())) {
    throw ArgumentError("J^T v: multiplier length mismatch");
  }
  out.setZero(x.size());
  Eigen::VectorXd g(x.size());
  for (std::size_t j = 0; j < eqs.size(); ++j) {
    if (v[j] == 0.0) continue;
    eval_gradient(eqs[j], as_span(x), {g.data(), static_cast<std::size_t>(g.size())});
    out += v[j] * g;
  }
}

}  // namespace polymoment
