#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polymoment/poly.hpp"

namespace polymoment {

/// Read-only view of moments mu^{(l)}_{i,k} of L product measures on R^D,
/// k = 0..2d, stored contiguously with k fastest, then i, then l.
class MomentView {
 public:
  MomentView(std::span<const double> data, int components, int dimension, int degree);

  int components() const noexcept { return components_; }
  int dimension() const noexcept { return dimension_; }
  int degree() const noexcept { return degree_; }
  int per_axis() const noexcept { return 2 * degree_ + 1; }
  std::span<const double> data() const noexcept { return data_; }

  std::size_t offset(int l, int i, int k = 0) const noexcept {
    return (static_cast<std::size_t>(l) * dimension_ + i) * per_axis() + k;
  }
  double operator()(int l, int i, int k) const noexcept { return data_[offset(l, i, k)]; }
  /// The 2d+1 moments of the 1D factor measure mu^{(l)}_i.
  std::span<const double> axis(int l, int i) const noexcept {
    return data_.subspan(offset(l, i), per_axis());
  }

 private:
  std::span<const double> data_;
  int components_;
  int dimension_;
  int degree_;
};

/// Owning L x D x (2d+1) moment array.
class MomentVector {
 public:
  MomentVector(int components, int dimension, int degree);
  MomentVector(int components, int dimension, int degree, std::vector<double> data);

  /// Component l is weight_l times the Dirac product measure at points[l]; the weight
  /// multiplies the first axis.
  static MomentVector from_diracs(const std::vector<std::vector<double>>& points,
                                  const std::vector<double>& weights, int degree);

  MomentView view() const { return MomentView(data_, components_, dimension_, degree_); }
  operator MomentView() const { return view(); }

  int components() const noexcept { return components_; }
  int dimension() const noexcept { return dimension_; }
  int degree() const noexcept { return degree_; }
  double& at(int l, int i, int k) { return data_[view().offset(l, i, k)]; }
  double at(int l, int i, int k) const { return data_[view().offset(l, i, k)]; }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  int components_;
  int dimension_;
  int degree_;
  std::vector<double> data_;
};

struct MomentMatrix {
  int order = 0;             // matrix is (order+1) x (order+1)
  Eigen::MatrixXd entries;   // symmetric
};

/// Moment of a sum of product measures: sum_l prod_i mu^{(l)}_{i,n_i}.
double phi(const MomentView& mu, const MultiIndex& n);

/// d phi_n / d mu, shaped like mu.data().
std::vector<double> phi_gradient(const MomentView& mu, const MultiIndex& n);

/// Moment prod_i mu^{(l)}_{i,n_i} of the single product measure l.
double component_moment(const MomentView& mu, int l, const MultiIndex& n);

/// out += scale * d(component_moment(mu, l, n))/d mu. Only entries of component l change.
void accumulate_component_moment_gradient(const MomentView& mu, int l, const MultiIndex& n,
                                          double scale, std::span<double> out);

/// Throws ArgumentError unless n has length D and 0 <= n_i <= 2d.
void check_moment_index(const MomentView& mu, const MultiIndex& n);

/// Localizing matrix entries sum_k weight_k mu[k+m+n], 0 <= m,n <= order.
/// `weight` is univariate; weight = 1 gives the Hankel moment matrix.
MomentMatrix assemble_moment_matrix(std::span<const double> moments, const SparsePoly& weight,
                                    int order);

/// The univariate weight 1 - t^2 whose localizing matrix confines support to [-1,1].
SparsePoly box_weight();

/// gamma . phi(mu^{(l)}) = sum_{n in supp(gamma)} gamma_n prod_i mu^{(l)}_{i,n_i}.
double gamma_dot_phi(const MomentView& mu, int l, const SparsePoly& gamma);

}  // namespace polymoment
