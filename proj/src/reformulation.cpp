#include "polymoment/reformulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "polymoment/errors.hpp"

namespace polymoment {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstFactor = Eigen::Map<const RowMajorMatrix>;
using Factor = Eigen::Map<RowMajorMatrix>;

// Keeps the starting factors well inside full rank; rank-deficient factors sit near saddles.
constexpr double kInitialEigenFloor = 0.05;

// Writes a (rows x rank) factor F with F F^T = M (eigenvalues clipped at `floor`).
void psd_factor(const Eigen::MatrixXd& m, int rank, double floor, double* out) {
  const int rows = static_cast<int>(m.rows());
  Factor f(out, rows, rank);
  if (rows == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(floor).cwiseSqrt();
  const Eigen::MatrixXd& vecs = eig.eigenvectors();
  if (rank == rows) {
    f = vecs * vals.asDiagonal() * vecs.transpose();
  } else {
    // eigenvalues ascend; keep the largest `rank`
    f = vecs.rightCols(rank) * vals.tail(rank).asDiagonal();
  }
}

}  // namespace

DecisionLayout DecisionLayout::make(int dimension, int degree, int components,
                                    int num_equalities, int rank_x, int rank_y) {
  if (dimension < 1 || degree < 1) throw ArgumentError("layout: need D >= 1 and d >= 1");
  if (components < 1) throw ArgumentError("layout: need L >= 1");
  if (num_equalities < 0) throw ArgumentError("layout: negative constraint count");
  DecisionLayout lay;
  lay.dimension = dimension;
  lay.degree = degree;
  lay.components = components;
  lay.num_equalities = num_equalities;
  lay.rank_x = rank_x == 0 ? degree + 1 : rank_x;
  lay.rank_y = rank_y == 0 ? degree : rank_y;
  if (lay.rank_x < 1 || lay.rank_x > degree + 1 || lay.rank_y < 1 || lay.rank_y > degree) {
    throw ArgumentError("layout: factor rank out of range");
  }
  const std::size_t blocks = static_cast<std::size_t>(components) * dimension;
  lay.mu_offset = 0;
  lay.mu_size = blocks * (2 * degree + 1);
  lay.x_offset = lay.mu_size;
  lay.x_size = blocks * (degree + 1) * lay.rank_x;
  lay.y_offset = lay.x_offset + lay.x_size;
  lay.y_size = blocks * degree * lay.rank_y;
  lay.total = lay.y_offset + lay.y_size;
  return lay;
}

ReformulatedNlp::ReformulatedNlp(const ProblemSpec& problem, ReformulationOptions options)
    : problem_(problem) {
  if (!problem.inequalities().empty()) {
    throw UsageError("reformulation needs an equality-only problem; call slackify first");
  }
  if (options.components < 1) throw ArgumentError("reformulation: L must be at least 1");
  layout_ = DecisionLayout::make(problem.dimension(), problem.degree(), options.components,
                                 static_cast<int>(problem.equalities().size()), options.rank_x,
                                 options.rank_y);
  for (const auto& [n, c] : problem.objective().terms()) objective_terms_.push_back({n, c});
  for (const auto& g : problem.equalities()) {
    gammas_.push_back(square_to_gamma(g));
    std::vector<Term> terms;
    for (const auto& [n, c] : gammas_.back().terms()) terms.push_back({n, c});
    gamma_terms_.push_back(std::move(terms));
  }
}

ReformulatedNlp build_reformulation(const ProblemSpec& problem, int components) {
  ReformulationOptions opts;
  opts.components = components;
  return ReformulatedNlp(problem, opts);
}

void ReformulatedNlp::check_input(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != layout_.total) {
    throw ArgumentError("decision vector has length " + std::to_string(z.size()) +
                        ", expected " + std::to_string(layout_.total));
  }
  if (!z.allFinite()) throw NumericError("decision vector has non-finite entries");
}

MomentView ReformulatedNlp::moments(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != layout_.total) {
    throw ArgumentError("decision vector has the wrong length");
  }
  return MomentView(std::span<const double>(z.data() + layout_.mu_offset, layout_.mu_size),
                    layout_.components, layout_.dimension, layout_.degree);
}

double ReformulatedNlp::objective(const Eigen::VectorXd& z) const {
  check_input(z);
  const MomentView mu = moments(z);
  double sum = 0.0;
  for (const Term& t : objective_terms_) {
    for (int l = 0; l < layout_.components; ++l) {
      sum += t.coeff * component_moment(mu, l, t.exponents);
    }
  }
  return sum;
}

void ReformulatedNlp::objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
  check_input(z);
  const MomentView mu = moments(z);
  grad.setZero(z.size());
  std::span<double> out(grad.data() + layout_.mu_offset, layout_.mu_size);
  for (const Term& t : objective_terms_) {
    for (int l = 0; l < layout_.components; ++l) {
      accumulate_component_moment_gradient(mu, l, t.exponents, t.coeff, out);
    }
  }
}

void ReformulatedNlp::constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c) const {
  check_input(z);
  const MomentView mu = moments(z);
  const int d = layout_.degree;
  c.resize(num_constraints());

  for (int l = 0; l < layout_.components; ++l) {
    for (int i = 0; i < layout_.dimension; ++i) {
      const auto axis = mu.axis(l, i);
      ConstFactor x(z.data() + layout_.x_block(l, i), d + 1, layout_.rank_x);
      std::size_t row = layout_.hankel_row(l, i);
      for (int m = 0; m <= d; ++m) {
        for (int n = m; n <= d; ++n) c[row++] = axis[m + n] - x.row(m).dot(x.row(n));
      }
      ConstFactor y(z.data() + layout_.y_block(l, i), d, layout_.rank_y);
      row = layout_.localizing_row(l, i);
      for (int m = 0; m < d; ++m) {
        for (int n = m; n < d; ++n) {
          c[row++] = axis[m + n] - axis[m + n + 2] - y.row(m).dot(y.row(n));
        }
      }
    }
  }
  for (std::size_t j = 0; j < gamma_terms_.size(); ++j) {
    for (int l = 0; l < layout_.components; ++l) {
      double v = 0.0;
      for (const Term& t : gamma_terms_[j]) v += t.coeff * component_moment(mu, l, t.exponents);
      c[layout_.gamma_row(static_cast<int>(j), l)] = v;
    }
  }
  const MultiIndex zero(layout_.dimension, 0);
  double mass = 0.0;
  for (int l = 0; l < layout_.components; ++l) mass += component_moment(mu, l, zero);
  c[layout_.normalization_row()] = mass - 1.0;
}

void ReformulatedNlp::constraint_jacobian_transpose_product(const Eigen::VectorXd& z,
                                                            const Eigen::VectorXd& v,
                                                            Eigen::VectorXd& out) const {
  check_input(z);
  if (v.size() != num_constraints()) throw ArgumentError("J^T v: multiplier length mismatch");
  const MomentView mu = moments(z);
  const int d = layout_.degree;
  out.setZero(z.size());
  std::span<double> gmu(out.data() + layout_.mu_offset, layout_.mu_size);

  for (int l = 0; l < layout_.components; ++l) {
    for (int i = 0; i < layout_.dimension; ++i) {
      const std::size_t base = mu.offset(l, i);
      ConstFactor x(z.data() + layout_.x_block(l, i), d + 1, layout_.rank_x);
      Factor gx(out.data() + layout_.x_block(l, i), d + 1, layout_.rank_x);
      std::size_t row = layout_.hankel_row(l, i);
      for (int m = 0; m <= d; ++m) {
        for (int n = m; n <= d; ++n) {
          const double w = v[row++];
          gmu[base + m + n] += w;
          // d(X_m . X_n)/dX: both rows; for m == n this adds 2 X_m.
          gx.row(m) -= w * x.row(n);
          gx.row(n) -= w * x.row(m);
        }
      }
      ConstFactor y(z.data() + layout_.y_block(l, i), d, layout_.rank_y);
      Factor gy(out.data() + layout_.y_block(l, i), d, layout_.rank_y);
      row = layout_.localizing_row(l, i);
      for (int m = 0; m < d; ++m) {
        for (int n = m; n < d; ++n) {
          const double w = v[row++];
          gmu[base + m + n] += w;
          gmu[base + m + n + 2] -= w;
          gy.row(m) -= w * y.row(n);
          gy.row(n) -= w * y.row(m);
        }
      }
    }
  }
  for (std::size_t j = 0; j < gamma_terms_.size(); ++j) {
    for (int l = 0; l < layout_.components; ++l) {
      const double w = v[layout_.gamma_row(static_cast<int>(j), l)];
      if (w == 0.0) continue;
      for (const Term& t : gamma_terms_[j]) {
        accumulate_component_moment_gradient(mu, l, t.exponents, w * t.coeff, gmu);
      }
    }
  }
  const double w = v[layout_.normalization_row()];
  const MultiIndex zero(layout_.dimension, 0);
  for (int l = 0; l < layout_.components; ++l) {
    accumulate_component_moment_gradient(mu, l, zero, w, gmu);
  }
}

void ReformulatedNlp::rebalance(Eigen::VectorXd& z, Eigen::VectorXd& lambda) const {
  check_input(z);
  if (lambda.size() != num_constraints()) throw ArgumentError("rebalance: multiplier length mismatch");
  const int D = layout_.dimension;
  const int d = layout_.degree;
  const std::size_t axis_len = 2 * static_cast<std::size_t>(d) + 1;
  std::vector<double> mass(D);
  for (int l = 0; l < layout_.components; ++l) {
    double log_alpha = 0.0;
    bool usable = true;
    for (int i = 0; i < D; ++i) {
      mass[i] = z[static_cast<Eigen::Index>(layout_.mu_offset + (static_cast<std::size_t>(l) * D + i) * axis_len)];
      if (!(mass[i] > 1e-12)) {
        usable = false;
        break;
      }
      log_alpha += std::log(mass[i]);
    }
    if (!usable) continue;
    const double target = std::exp(log_alpha / D);
    for (int i = 0; i < D; ++i) {
      const double s = target / mass[i];
      if (s == 1.0) continue;
      const double r = std::sqrt(s);
      const std::size_t mu0 = layout_.mu_offset + (static_cast<std::size_t>(l) * D + i) * axis_len;
      z.segment(static_cast<Eigen::Index>(mu0), static_cast<Eigen::Index>(axis_len)) *= s;
      z.segment(static_cast<Eigen::Index>(layout_.x_block(l, i)), (d + 1) * layout_.rank_x) *= r;
      z.segment(static_cast<Eigen::Index>(layout_.y_block(l, i)), d * layout_.rank_y) *= r;
      lambda.segment(static_cast<Eigen::Index>(layout_.hankel_row(l, i)), layout_.hankel_constraints_per_axis()) /= s;
      lambda.segment(static_cast<Eigen::Index>(layout_.localizing_row(l, i)), layout_.localizing_constraints_per_axis()) /= s;
    }
  }
}

Eigen::VectorXd ReformulatedNlp::encode(const MomentVector& mu, double eigen_floor) const {
  if (mu.components() != layout_.components || mu.dimension() != layout_.dimension ||
      mu.degree() != layout_.degree) {
    throw ArgumentError("encode: moment shape does not match the layout");
  }
  const int d = layout_.degree;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.total));
  std::copy(mu.data().begin(), mu.data().end(), z.data() + layout_.mu_offset);
  const MomentView view = mu.view();
  const SparsePoly one = SparsePoly::constant(1, 1.0);
  const SparsePoly box = box_weight();
  for (int l = 0; l < layout_.components; ++l) {
    for (int i = 0; i < layout_.dimension; ++i) {
      const auto axis = view.axis(l, i);
      psd_factor(assemble_moment_matrix(axis, one, d).entries, layout_.rank_x, eigen_floor,
                 z.data() + layout_.x_block(l, i));
      psd_factor(assemble_moment_matrix(axis, box, d - 1).entries, layout_.rank_y, eigen_floor,
                 z.data() + layout_.y_block(l, i));
    }
  }
  return z;
}

Eigen::VectorXd ReformulatedNlp::initial_point(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  const int L = layout_.components;
  const int D = layout_.dimension;
  const int d = layout_.degree;

  MomentVector mu(L, D, d);
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < D; ++i) {
      const double x = uniform(rng);
      double p = 1.0;
      for (int k = 0; k <= 2 * d; ++k) {
        mu.at(l, i, k) = (k == 0) ? 1.0 : p + noise(rng);
        p *= x;
      }
    }
  }
  // equal mixture weights, carried by the first axis of each component
  const MultiIndex zero(D, 0);
  for (int l = 0; l < L; ++l) {
    const double alpha = component_moment(mu.view(), l, zero);
    for (int k = 0; k <= 2 * d; ++k) mu.at(l, 0, k) /= (alpha * L);
  }
  return encode(mu, kInitialEigenFloor);
}

}  // namespace polymoment
