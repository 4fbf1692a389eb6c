#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "polymoment/bench.hpp"
#include "polymoment/errors.hpp"
#include "polymoment/poly.hpp"
#include "polymoment/recovery.hpp"

using namespace polymoment;

namespace {

// CSV text with the wall_time_s column blanked.
std::string without_times(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 10);
    cells[8] = "";
    for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
    out += "\n";
  }
  return out;
}

BenchmarkRow synthetic(int D, double time, double rel, bool ok) {
  BenchmarkRow r;
  r.family = "discrete";
  r.dimension = D;
  r.status = ok ? SolveStatus::Converged : SolveStatus::RestartExhausted;
  r.wall_time_s = time;
  r.rel_error = rel;
  r.success = ok;
  return r;
}

}  // namespace

TEST_CASE("annulus generator") {
  const ProblemSpec p = gen_annulus(2);
  REQUIRE(p.equalities().size() == 1);
  const SparsePoly& g = p.equalities()[0];
  CHECK(eval(g, std::vector<double>{-1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(eval(g, std::vector<double>{0.5, 0.0}) == doctest::Approx(0.0));
  CHECK(eval(g, std::vector<double>{0.0, 0.0}) == doctest::Approx(0.25));
  CHECK(eval(p.objective(), std::vector<double>{1.0, 0.0}) == doctest::Approx(-0.81).epsilon(1e-15));
  CHECK(p.objective().degree() == 2);
  CHECK(g.degree() == 4);
  for (int D = 1; D <= 8; ++D) {
    const ProblemSpec q = gen_annulus(D);
    const std::vector<double> x = known_minimizer(Family::Annulus, D);
    CHECK(known_optimum(Family::Annulus, D) == -1.21);
    CHECK(eval(q.objective(), x) == doctest::Approx(-1.21).epsilon(1e-15));
    CHECK(eval(q.equalities()[0], x) == doctest::Approx(0.0));
  }
}

TEST_CASE("discrete generator") {
  const ProblemSpec p1 = gen_discrete(1);
  REQUIRE(p1.equalities().size() == 1);
  for (double r : {-1.0 / 3.0, 0.0, 2.0 / 3.0}) {
    CHECK(std::abs(eval(p1.equalities()[0], std::vector<double>{r})) <= 1e-15);
  }
  CHECK(known_optimum(Family::Discrete, 2) == doctest::Approx(-529.0 / 450.0).epsilon(1e-15));
  CHECK(known_optimum(Family::Discrete, 5) == doctest::Approx(-529.0 / 180.0).epsilon(1e-15));
  for (int D = 1; D <= 8; ++D) {
    const ProblemSpec q = gen_discrete(D);
    CHECK(q.equalities().size() == static_cast<std::size_t>(D));
    for (const auto& g : q.equalities()) CHECK(g.variables().size() == 1);
    const std::vector<double> x = known_minimizer(Family::Discrete, D);
    CHECK(eval(q.objective(), x) == doctest::Approx(known_optimum(Family::Discrete, D)).epsilon(1e-14));
  }
}

TEST_CASE("family names and thresholds") {
  CHECK(parse_family("annulus") == Family::Annulus);
  CHECK(parse_family("discrete") == Family::Discrete);
  CHECK(parse_method("reformulation") == Method::Reformulation);
  CHECK(parse_method("original") == Method::Original);
  CHECK_THROWS_AS(parse_family("torus"), ArgumentError);
  CHECK_THROWS_AS(parse_method("sdp"), ArgumentError);
  CHECK(success_threshold(Family::Annulus) == 1e-2);
  CHECK(success_threshold(Family::Discrete) == 1e-1);
  CHECK(default_tolerance(Family::Annulus) == 1e-2);
  CHECK(default_tolerance(Family::Discrete) == 1e-1);
}

TEST_CASE("instance seeds are stable and distinct") {
  CHECK(instance_seed(Family::Annulus, 2, 0) == instance_seed(Family::Annulus, 2, 0));
  CHECK(instance_seed(Family::Annulus, 2, 0) != instance_seed(Family::Annulus, 2, 1));
  CHECK(instance_seed(Family::Annulus, 2, 0) != instance_seed(Family::Discrete, 2, 0));
  CHECK(instance_seed(Family::Annulus, 2, 0) != instance_seed(Family::Annulus, 3, 0));
}

TEST_CASE("one dimension, one instance, two methods gives two rows") {
  BenchmarkOptions opts;
  opts.family = Family::Annulus;
  opts.dims = {2};
  opts.instances = 1;
  const auto rows = run_benchmark(opts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == Method::Reformulation);
  CHECK(rows[1].method == Method::Original);
  for (const auto& r : rows) {
    CHECK(r.rel_error >= 0.0);
    if (r.success) CHECK(r.status == SolveStatus::Converged);
    CHECK(r.success == (r.status == SolveStatus::Converged && r.rel_error <= 1e-2));
    CHECK(r.seed == instance_seed(Family::Annulus, 2, 0));
  }
}

TEST_CASE("benchmark options are validated") {
  BenchmarkOptions opts;
  CHECK_THROWS_AS(run_benchmark(opts), ArgumentError);
  opts.dims = {2};
  opts.instances = 0;
  CHECK_THROWS_AS(run_benchmark(opts), ArgumentError);
}

TEST_CASE("summary aggregates") {
  std::vector<BenchmarkRow> rows;
  const double rels[] = {1e-4, 1e-4, 2e-4, 0.0};
  for (double r : rels) rows.push_back(synthetic(2, 1.0, r, true));
  const Summary s = summarize(rows);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].runs == 4);
  CHECK(s.rows[0].successes == 4);
  CHECK(s.rows[0].success_fraction == 1.0);
  CHECK(s.rows[0].mean_rel_error == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(s.rows[0].median_rel_error == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("time slope of synthetic D^5 data") {
  std::vector<BenchmarkRow> rows;
  for (int D = 2; D <= 8; ++D) {
    for (int k = 0; k < 3; ++k) rows.push_back(synthetic(D, 1e-3 * std::pow(D, 5), 0.0, true));
  }
  const Summary s = summarize(rows);
  REQUIRE(s.reformulation_time_slope.count("discrete") == 1);
  CHECK(std::abs(s.reformulation_time_slope.at("discrete") - 5.0) <= 0.1);
  CHECK(summary_csv(s).find("# discrete reformulation log-log time slope") != std::string::npos);
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), ArgumentError);
}

TEST_CASE("CSV schema") {
  CHECK(csv_header() == "family,dimension,instance,seed,method,status,objective,rel_error,wall_time_s,success");
  BenchmarkRow r = synthetic(3, 0.25, 0.5, false);
  r.instance = 1;
  r.seed = 42;
  r.method = Method::Original;
  const std::string line = to_csv(r);
  CHECK(line.rfind("discrete,3,1,42,original,RestartExhausted,", 0) == 0);
  CHECK(line.substr(line.size() - 11) == ",0.250000,0");
}

TEST_CASE("CSV output is identical for any job count modulo time") {
  BenchmarkOptions opts;
  opts.family = Family::Discrete;
  opts.dims = {2, 3};
  opts.instances = 2;
  std::ostringstream one, two, again;
  opts.jobs = 1;
  run_benchmark(opts, &one);
  run_benchmark(opts, &again);
  opts.jobs = 3;
  run_benchmark(opts, &two);
  CHECK(without_times(one.str()) == without_times(again.str()));
  CHECK(without_times(one.str()) == without_times(two.str()));
  CHECK(one.str().rfind(csv_header() + "\n", 0) == 0);
}
