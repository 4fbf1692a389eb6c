#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "polymoment/bench.hpp"
#include "polymoment/errors.hpp"
#include "polymoment/moments.hpp"
#include "polymoment/poly.hpp"

using namespace polymoment;

namespace {

MomentVector random_moments(std::mt19937_64& rng, int L, int D, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MomentVector mu(L, D, d);
  for (double& v : mu.data()) v = u(rng);
  return mu;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

std::vector<double> dirac_axis(double x, int d) {
  std::vector<double> m(2 * d + 1);
  double p = 1.0;
  for (double& v : m) {
    v = p;
    p *= x;
  }
  return m;
}

// Sum of |coefficient * monomial| at x: the scale of the rounding error of eval(p, x).
double term_magnitude(const SparsePoly& p, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& [n, c] : p.terms()) {
    double t = std::abs(c);
    for (std::size_t i = 0; i < x.size(); ++i) t *= std::pow(std::abs(x[i]), n[i]);
    s += t;
  }
  return s;
}

}  // namespace

TEST_CASE("phi examples") {
  MomentVector ones(1, 3, 2);
  for (int i = 0; i < 3; ++i) ones.at(0, i, 0) = 1.0;
  CHECK(phi(ones, {0, 0, 0}) == 1.0);

  const MomentVector dirac = MomentVector::from_diracs({{0.5, -0.25}}, {1.0}, 1);
  CHECK(phi(dirac, {2, 1}) == doctest::Approx(-0.0625).epsilon(1e-15));

  // component 1 scaled by w on its first axis, component 2 carries 1 - w
  const MomentVector mix = MomentVector::from_diracs({{1.0, 0.0}, {0.0, 1.0}}, {0.3, 0.7}, 1);
  CHECK(phi(mix, {2, 0}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(phi(mix, {0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("phi rejects exponents outside the stored range") {
  const MomentVector mu(1, 2, 1);
  CHECK_THROWS_AS(phi(mu, {3, 0}), ArgumentError);
  CHECK_THROWS_AS(phi(mu, {-1, 0}), ArgumentError);
  CHECK_THROWS_AS(phi(mu, {0}), ArgumentError);
}

TEST_CASE("phi_gradient examples") {
  MomentVector one(1, 1, 2);
  for (double& v : one.data()) v = 0.7;
  for (int k = 0; k <= 4; ++k) {
    const std::vector<double> g = phi_gradient(one, {k});
    for (int j = 0; j <= 4; ++j) CHECK(g[j] == (j == k ? 1.0 : 0.0));
  }

  const MomentVector dirac = MomentVector::from_diracs({{0.5, -0.25}}, {1.0}, 1);
  const std::vector<double> g = phi_gradient(dirac, {2, 1});
  const MomentView v = dirac.view();
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (j == v.offset(0, 0, 2)) {
      CHECK(g[j] == doctest::Approx(-0.25));
    } else if (j == v.offset(0, 1, 1)) {
      CHECK(g[j] == doctest::Approx(0.25));
    } else {
      CHECK(g[j] == 0.0);
    }
  }
}

TEST_CASE("phi_gradient matches central differences on random moments") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + trial % 3;
    const int D = 1 + trial % 4;
    const int d = 1 + trial % 3;
    MomentVector mu = random_moments(rng, L, D, d);
    std::uniform_int_distribution<int> e(0, 2 * d);
    MultiIndex n(D);
    for (int& k : n) k = e(rng);
    const std::vector<double> g = phi_gradient(mu, n);
    for (std::size_t j = 0; j < mu.data().size(); ++j) {
      const double h = 1e-6;
      const double saved = mu.data()[j];
      mu.data()[j] = saved + h;
      const double fp = phi(mu, n);
      mu.data()[j] = saved - h;
      const double fm = phi(mu, n);
      mu.data()[j] = saved;
      const double fd = (fp - fm) / (2 * h);
      CHECK(std::abs(fd - g[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])));
    }
  }
}

TEST_CASE("moment matrix examples") {
  const SparsePoly one = SparsePoly::constant(1, 1.0);
  const MomentMatrix m = assemble_moment_matrix(dirac_axis(0.5, 1), one, 1);
  CHECK(m.order == 1);
  CHECK(m.entries(0, 0) == 1.0);
  CHECK(m.entries(0, 1) == 0.5);
  CHECK(m.entries(1, 0) == 0.5);
  CHECK(m.entries(1, 1) == 0.25);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.entries);
  CHECK(eig.eigenvalues()(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(eig.eigenvalues()(1) == doctest::Approx(1.25));

  // uniform probability measure on [-1,1]: moments by the midpoint rule
  const int cells = 200000;
  std::vector<double> uni(3, 0.0);
  for (int c = 0; c < cells; ++c) {
    const double t = -1.0 + (c + 0.5) * 2.0 / cells;
    uni[0] += 1.0 / cells;
    uni[1] += t / cells;
    uni[2] += t * t / cells;
  }
  const MomentMatrix u = assemble_moment_matrix(uni, one, 1);
  CHECK(u.entries(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(u.entries(0, 1)) < 1e-12);
  CHECK(u.entries(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(min_eigenvalue(u.entries) >= 0.0);

  const SparsePoly box = box_weight();
  CHECK(assemble_moment_matrix(dirac_axis(0.5, 1), box, 0).entries(0, 0) == doctest::Approx(0.75));
  CHECK(assemble_moment_matrix(dirac_axis(1.5, 1), box, 0).entries(0, 0) == doctest::Approx(-1.25));
}

TEST_CASE("moment matrix needs enough moments") {
  const SparsePoly one = SparsePoly::constant(1, 1.0);
  CHECK_THROWS_AS(assemble_moment_matrix(dirac_axis(0.5, 1), one, 2), ArgumentError);
  CHECK_THROWS_AS(assemble_moment_matrix(dirac_axis(0.5, 1), box_weight(), 1), ArgumentError);
  CHECK_THROWS_AS(assemble_moment_matrix(dirac_axis(0.5, 2), SparsePoly::variable(2, 0), 1),
                  ArgumentError);
}

TEST_CASE("Hankel structure and symmetry") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 5;
    std::vector<double> m(2 * d + 1);
    for (double& v : m) v = u(rng);
    const Eigen::MatrixXd h = assemble_moment_matrix(m, SparsePoly::constant(1, 1.0), d).entries;
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) CHECK(h(a + 1, b) == h(a, b + 1));
    }
    const Eigen::MatrixXd y = assemble_moment_matrix(m, box_weight(), d - 1).entries;
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Dirac moments inside the box give PSD moment and localizing matrices") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 6;
    const double x = trial < 2 ? (trial == 0 ? -1.0 : 1.0) : u(rng);
    const std::vector<double> m = dirac_axis(x, d);
    const Eigen::MatrixXd h = assemble_moment_matrix(m, SparsePoly::constant(1, 1.0), d).entries;
    const Eigen::MatrixXd y = assemble_moment_matrix(m, box_weight(), d - 1).entries;
    CHECK(min_eigenvalue(h) >= -1e-10 * std::max(1.0, h.norm()));
    CHECK(min_eigenvalue(y) >= -1e-10 * std::max(1.0, y.norm()));
  }
}

TEST_CASE("phi is linear in each axis vector") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + trial % 2;
    const int D = 1 + trial % 4;
    const int d = 1 + trial % 3;
    const MomentVector base = random_moments(rng, L, D, d);
    const MomentVector other = random_moments(rng, L, D, d);
    std::uniform_int_distribution<int> pick_l(0, L - 1), pick_i(0, D - 1), e(0, 2 * d);
    const int l = pick_l(rng);
    const int i = pick_i(rng);
    MultiIndex n(D);
    for (int& k : n) k = e(rng);
    const double a = u(rng), b = u(rng);

    auto with_axis = [&](const MomentVector& src) {
      MomentVector out = base;
      for (int k = 0; k <= 2 * d; ++k) out.at(l, i, k) = src.at(l, i, k);
      return out;
    };
    MomentVector combo = base;
    for (int k = 0; k <= 2 * d; ++k) {
      combo.at(l, i, k) = a * base.at(l, i, k) + b * other.at(l, i, k);
    }
    const double lhs = phi(combo, n);
    // phi(a u + b v) = a phi(u) + b phi(v) for the touched component, the rest unchanged
    MomentVector zero_axis = base;
    for (int k = 0; k <= 2 * d; ++k) zero_axis.at(l, i, k) = 0.0;
    const double rest = phi(zero_axis, n);
    const double rhs =
        a * (phi(with_axis(base), n) - rest) + b * (phi(with_axis(other), n) - rest) + rest;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("gamma_dot_phi examples") {
  const SparsePoly gamma = square_to_gamma(gen_annulus(2).equalities().at(0));
  const int d = 4;
  const MomentVector feasible = MomentVector::from_diracs({{-1.0, 0.0}}, {1.0}, d);
  CHECK(std::abs(gamma_dot_phi(feasible, 0, gamma)) <= 1e-14);
  const MomentVector origin = MomentVector::from_diracs({{0.0, 0.0}}, {1.0}, d);
  CHECK(gamma_dot_phi(origin, 0, gamma) == doctest::Approx(0.0625).epsilon(1e-14));

  MomentVector ones(2, 3, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : ones.data()) v = u(rng);
  for (int l = 0; l < 2; ++l) {
    for (int i = 0; i < 3; ++i) ones.at(l, i, 0) = 1.0;
  }
  CHECK(gamma_dot_phi(ones, 1, SparsePoly::constant(3, 1.0)) == 1.0);
}

TEST_CASE("gamma_dot_phi at a Dirac equals g squared") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int D = 1; D <= 5; ++D) {
    for (const ProblemSpec& p : {gen_annulus(D), gen_discrete(D)}) {
      for (const SparsePoly& g : p.equalities()) {
        const SparsePoly gamma = square_to_gamma(g);
        for (int trial = 0; trial < 20; ++trial) {
          std::vector<double> x(D);
          for (double& v : x) v = u(rng);
          const MomentVector mu = MomentVector::from_diracs({x}, {1.0}, p.degree());
          const double gv = eval(g, x);
          const double scale = std::max(gv * gv, term_magnitude(gamma, x));
          CHECK(std::abs(gamma_dot_phi(mu, 0, gamma) - gv * gv) <= 1e-10 * scale);
        }
      }
    }
  }
}

TEST_CASE("gamma_dot_phi checks exponent range") {
  const MomentVector mu(1, 1, 1);
  CHECK_THROWS_AS(gamma_dot_phi(mu, 0, square_to_gamma(SparsePoly::variable(1, 0) * SparsePoly::variable(1, 0))),
                  ArgumentError);
}
