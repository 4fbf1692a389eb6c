#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polymoment/bench.hpp"
#include "polymoment/errors.hpp"
#include "polymoment/poly.hpp"
#include "polymoment/problem_io.hpp"
#include "polymoment/recovery.hpp"
#include "polymoment/reformulation.hpp"
#include "polymoment/solver.hpp"

namespace pm = polymoment;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolve = 2;
constexpr int kExitIo = 3;

// finite doubles as numbers, the rest as strings ("inf", "nan")
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pm::IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw pm::IoError("failed writing " + path);
}

std::vector<int> parse_dims(const std::string& spec) {
  int a = 0, b = 0;
  char colon = 0;
  std::istringstream in(spec);
  if (!(in >> a)) throw pm::ArgumentError("--dims: expected A:B, got '" + spec + "'");
  if (in >> colon) {
    if (colon != ':' || !(in >> b)) throw pm::ArgumentError("--dims: expected A:B, got '" + spec + "'");
  } else {
    b = a;
  }
  std::string rest;
  if (in >> rest) throw pm::ArgumentError("--dims: trailing input in '" + spec + "'");
  if (a < 1 || b < a) throw pm::ArgumentError("--dims: need 1 <= A <= B");
  std::vector<int> dims;
  for (int d = a; d <= b; ++d) dims.push_back(d);
  return dims;
}

std::vector<pm::Method> parse_methods(const std::string& list) {
  std::vector<pm::Method> methods;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    methods.push_back(pm::parse_method(item));
  }
  if (methods.empty()) throw pm::ArgumentError("--methods: no method given");
  return methods;
}

struct SolveArgs {
  std::string problem;
  int components = 2;
  double tol = 1e-2;
  std::uint64_t seed = 0;
  bool polish = false;
  std::string out;
};

int run_solve(const SolveArgs& args) {
  const pm::ProblemSpec original = pm::load_problem(args.problem);
  const pm::ProblemSpec problem = pm::slackify(original);
  pm::ReformulationOptions opts;
  opts.components = args.components;
  const pm::ReformulatedNlp nlp(problem, opts);

  pm::SolverConfig cfg;
  cfg.tol = args.tol;
  cfg.seed = args.seed;
  const pm::SolveReport rep =
      pm::solve(nlp, nlp.initial_point(args.seed), std::nullopt, cfg,
                [&nlp](std::uint64_t s) { return nlp.initial_point(s); });

  json report;
  report["status"] = pm::to_string(rep.status);
  report["objective"] = number(rep.objective);
  report["max_violation"] = number(rep.max_violation);
  report["stationarity"] = number(rep.stationarity);
  report["outer_iterations"] = rep.outer_iterations;
  report["inner_iterations"] = rep.inner_iterations;
  report["restarts"] = rep.restarts;
  report["wall_time_s"] = rep.wall_time_s;
  report["config"] = {{"L", args.components},
                      {"tol", args.tol},
                      {"feasibility_tol", cfg.feasibility_tol},
                      {"seed", args.seed},
                      {"polish", args.polish}};

  bool recovered = false;
  try {
    const pm::RecoveredSolution sol = pm::recover_location(nlp.moments(rep.x), problem, args.polish);
    // slack coordinates come after the original ones
    const std::vector<double> x(sol.location.begin(),
                                sol.location.begin() + original.dimension());
    const pm::CandidateReport check = pm::verify_candidate(original, x, cfg.tol);
    json mass = json::array();
    for (double a : sol.component_mass) mass.push_back(number(a));
    report["recovered"] = {{"location", x},
                           {"value", number(check.value)},
                           {"component", sol.component},
                           {"component_mass", mass},
                           {"max_violation", number(check.max_violation)},
                           {"feasible", check.feasible}};
    recovered = true;
  } catch (const pm::DegenerateSolutionError& e) {
    report["recovered"] = nullptr;
    report["recovery_error"] = e.what();
  }

  const std::string text = report.dump(2) + "\n";
  if (args.out.empty()) {
    std::cout << text;
  } else {
    write_text(args.out, text);
    std::cout << "status " << pm::to_string(rep.status) << "  objective " << rep.objective;
    if (recovered) std::cout << "  value " << report["recovered"]["value"].dump();
    std::cout << "\n";
  }
  return rep.status == pm::SolveStatus::Converged && recovered ? kExitOk : kExitSolve;
}

struct BenchArgs {
  std::string family;
  std::string dims;
  int instances = 4;
  std::string methods = "reformulation,original";
  int jobs = 1;
  int components = 2;
  double tol = 0.0;
  std::string out;
  std::string summary;
};

int run_bench(const BenchArgs& args) {
  pm::BenchmarkOptions opts;
  opts.family = pm::parse_family(args.family);
  opts.dims = parse_dims(args.dims);
  if (args.instances < 1) throw pm::ArgumentError("--instances must be positive");
  if (args.jobs < 1) throw pm::ArgumentError("--jobs must be positive");
  opts.instances = args.instances;
  opts.methods = parse_methods(args.methods);
  opts.jobs = args.jobs;
  opts.components = args.components;
  if (args.tol > 0.0) {
    opts.solver.tol = args.tol;
    opts.tol_override = true;
  }

  std::ofstream csv(args.out, std::ios::binary | std::ios::trunc);
  if (!csv) throw pm::IoError("cannot open " + args.out + " for writing");
  const std::vector<pm::BenchmarkRow> rows = pm::run_benchmark(opts, &csv);
  csv.close();
  if (!csv) throw pm::IoError("failed writing " + args.out);

  const pm::Summary summary = pm::summarize(rows);
  const std::string table = pm::summary_csv(summary);
  std::cout << table;
  if (!args.summary.empty()) write_text(args.summary, table);
  return kExitOk;
}

struct OracleArgs {
  std::string problem;
  int grid = 201;
  double band = 1e-2;
};

int run_oracle(const OracleArgs& args) {
  const pm::ProblemSpec problem = pm::load_problem(args.problem);
  const pm::GridMinimum m = pm::brute_force_grid(problem, args.grid, args.band);
  json out = {{"value", number(m.value)},
              {"location", m.location},
              {"points_kept", m.points_kept},
              {"grid", args.grid},
              {"band", args.band}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct GenArgs {
  std::string family;
  int dimension = 2;
  std::string out;
};

int run_gen(const GenArgs& args) {
  if (args.dimension < 1) throw pm::ArgumentError("--dimension must be positive");
  const pm::ProblemSpec problem = pm::generate(pm::parse_family(args.family), args.dimension);
  pm::save_problem(problem, args.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial optimization through moments of sums of product measures"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve a problem file through the moment reformulation");
  solve->add_option("--problem", solve_args.problem, "Problem JSON file")->required();
  solve->add_option("--L", solve_args.components, "Number of product-measure components")
      ->check(CLI::PositiveNumber);
  solve->add_option("--tol", solve_args.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--seed", solve_args.seed, "Random seed");
  solve->add_flag("--polish", solve_args.polish, "Refine the recovered point toward feasibility");
  solve->add_option("--out", solve_args.out, "Report JSON file (stdout when omitted)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Run a benchmark campaign and write CSV rows");
  bench->add_option("--family", bench_args.family, "annulus or discrete")
      ->required()
      ->check(CLI::IsMember({"annulus", "discrete"}));
  bench->add_option("--dims", bench_args.dims, "Dimension range A:B")->required();
  bench->add_option("--instances", bench_args.instances, "Instances per dimension");
  bench->add_option("--methods", bench_args.methods, "Comma-separated: reformulation,original");
  bench->add_option("--jobs", bench_args.jobs, "Worker threads");
  bench->add_option("--L", bench_args.components, "Number of product-measure components")
      ->check(CLI::PositiveNumber);
  bench->add_option("--tol", bench_args.tol, "Solver tolerance (family default when omitted)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_args.out, "CSV output file")->required();
  bench->add_option("--summary", bench_args.summary, "Per-dimension summary CSV file");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Brute-force grid minimum of a problem file");
  oracle->add_option("--problem", oracle_args.problem, "Problem JSON file")->required();
  oracle->add_option("--grid", oracle_args.grid, "Points per axis")->check(CLI::Range(2, 100000000));
  oracle->add_option("--band", oracle_args.band, "Constraint violation band")
      ->check(CLI::NonNegativeNumber);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Write a benchmark family problem file");
  gen->add_option("--family", gen_args.family, "annulus or discrete")
      ->required()
      ->check(CLI::IsMember({"annulus", "discrete"}));
  gen->add_option("--dimension", gen_args.dimension, "Dimension D")->required();
  gen->add_option("--out", gen_args.out, "Problem JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return run_solve(solve_args);
    if (*bench) return run_bench(bench_args);
    if (*oracle) return run_oracle(oracle_args);
    if (*gen) return run_gen(gen_args);
  } catch (const pm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const pm::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const pm::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pm::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pm::NotSeparableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pm::DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pm::BandTooTightError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolve;
  } catch (const pm::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolve;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolve;
  }
  return kExitUsage;
}
