#include "polymoment/moments.hpp"

#include <cmath>
#include <string>

#include "polymoment/errors.hpp"

namespace polymoment {

MomentView::MomentView(std::span<const double> data, int components, int dimension, int degree)
    : data_(data), components_(components), dimension_(dimension), degree_(degree) {
  if (components < 1 || dimension < 1 || degree < 0) {
    throw ArgumentError("moment view: invalid shape");
  }
  const std::size_t expected =
      static_cast<std::size_t>(components) * dimension * (2 * degree + 1);
  if (data.size() != expected) {
    throw ArgumentError("moment view: expected " + std::to_string(expected) + " entries, got " +
                        std::to_string(data.size()));
  }
}

MomentVector::MomentVector(int components, int dimension, int degree)
    : MomentVector(components, dimension, degree,
                   std::vector<double>(static_cast<std::size_t>(std::max(components, 0)) *
                                           std::max(dimension, 0) * (2 * std::max(degree, 0) + 1),
                                       0.0)) {}

MomentVector::MomentVector(int components, int dimension, int degree, std::vector<double> data)
    : components_(components), dimension_(dimension), degree_(degree), data_(std::move(data)) {
  MomentView(data_, components_, dimension_, degree_);  // validates shape
  for (double v : data_) {
    if (!std::isfinite(v)) throw ArgumentError("moment vector: non-finite entry");
  }
}

MomentVector MomentVector::from_diracs(const std::vector<std::vector<double>>& points,
                                       const std::vector<double>& weights, int degree) {
  if (points.empty() || points.size() != weights.size()) {
    throw ArgumentError("from_diracs: need one weight per point");
  }
  const int dim = static_cast<int>(points.front().size());
  MomentVector mu(static_cast<int>(points.size()), dim, degree);
  for (int l = 0; l < mu.components(); ++l) {
    if (static_cast<int>(points[l].size()) != dim) throw ArgumentError("from_diracs: ragged points");
    for (int i = 0; i < dim; ++i) {
      double p = (i == 0) ? weights[l] : 1.0;
      for (int k = 0; k <= 2 * degree; ++k) {
        mu.at(l, i, k) = p;
        p *= points[l][i];
      }
    }
  }
  return mu;
}

void check_moment_index(const MomentView& mu, const MultiIndex& n) {
  if (static_cast<int>(n.size()) != mu.dimension()) {
    throw ArgumentError("moment index has length " + std::to_string(n.size()) +
                        ", expected " + std::to_string(mu.dimension()));
  }
  for (int e : n) {
    if (e < 0 || e > 2 * mu.degree()) {
      throw ArgumentError("moment exponent " + std::to_string(e) + " outside 0.." +
                          std::to_string(2 * mu.degree()));
    }
  }
}

double component_moment(const MomentView& mu, int l, const MultiIndex& n) {
  double prod = 1.0;
  for (int i = 0; i < mu.dimension(); ++i) prod *= mu(l, i, n[i]);
  return prod;
}

void accumulate_component_moment_gradient(const MomentView& mu, int l, const MultiIndex& n,
                                          double scale, std::span<double> out) {
  const int dim = mu.dimension();
  // prefix/suffix products give prod_{j != i} without dividing by a possibly-zero factor
  double prefix = 1.0;
  thread_local std::vector<double> suffix;
  suffix.assign(dim + 1, 1.0);
  for (int i = dim - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * mu(l, i, n[i]);
  for (int i = 0; i < dim; ++i) {
    out[mu.offset(l, i, n[i])] += scale * prefix * suffix[i + 1];
    prefix *= mu(l, i, n[i]);
  }
}

double phi(const MomentView& mu, const MultiIndex& n) {
  check_moment_index(mu, n);
  double sum = 0.0;
  for (int l = 0; l < mu.components(); ++l) sum += component_moment(mu, l, n);
  return sum;
}

std::vector<double> phi_gradient(const MomentView& mu, const MultiIndex& n) {
  check_moment_index(mu, n);
  std::vector<double> grad(mu.data().size(), 0.0);
  for (int l = 0; l < mu.components(); ++l) {
    accumulate_component_moment_gradient(mu, l, n, 1.0, grad);
  }
  return grad;
}

MomentMatrix assemble_moment_matrix(std::span<const double> moments, const SparsePoly& weight,
                                    int order) {
  if (weight.dimension() != 1) throw ArgumentError("moment matrix weight must be univariate");
  if (order < 0) throw ArgumentError("moment matrix order must be nonnegative");
  const int needed = 2 * order + weight.degree();
  if (needed >= static_cast<int>(moments.size())) {
    throw ArgumentError("moment matrix of order " + std::to_string(order) + " needs moments up to " +
                        std::to_string(needed) + ", only " + std::to_string(moments.size()) +
                        " available");
  }
  MomentMatrix m{order, Eigen::MatrixXd::Zero(order + 1, order + 1)};
  for (int r = 0; r <= order; ++r) {
    for (int c = r; c <= order; ++c) {
      double v = 0.0;
      for (const auto& [k, h] : weight.terms()) v += h * moments[k[0] + r + c];
      m.entries(r, c) = v;
      m.entries(c, r) = v;
    }
  }
  return m;
}

SparsePoly box_weight() {
  const SparsePoly t = SparsePoly::variable(1, 0);
  return SparsePoly::constant(1, 1.0) - t * t;
}

double gamma_dot_phi(const MomentView& mu, int l, const SparsePoly& gamma) {
  if (l < 0 || l >= mu.components()) throw ArgumentError("component index out of range");
  if (gamma.dimension() != mu.dimension()) throw ArgumentError("gamma dimension mismatch");
  double sum = 0.0;
  for (const auto& [n, c] : gamma.terms()) {
    check_moment_index(mu, n);
    sum += c * component_moment(mu, l, n);
  }
  return sum;
}

}  // namespace polymoment
