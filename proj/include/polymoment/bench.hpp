#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "polymoment/poly.hpp"
#include "polymoment/solver.hpp"

namespace polymoment {

enum class Family { Annulus, Discrete };
enum class Method { Reformulation, Original };

std::string to_string(Family family);
std::string to_string(Method method);
Family parse_family(const std::string& name);
Method parse_method(const std::string& name);

/// min -(x_1 - 0.1)^2  s.t. (|x|^2 - 1)(|x|^2 - 0.25) = 0. Optimum -1.21 at (-1, 0, ..., 0).
ProblemSpec gen_annulus(int dimension);
/// min -sum_i (x_i + 0.1)^2  s.t. (x_i + 1/3) x_i (x_i - 2/3) = 0 for every i.
/// 3^D feasible points; optimum -(529/900) D at (2/3, ..., 2/3).
ProblemSpec gen_discrete(int dimension);
ProblemSpec generate(Family family, int dimension);

double known_optimum(Family family, int dimension);
std::vector<double> known_minimizer(Family family, int dimension);
/// Relative-error threshold counted as a success: 1e-2 (annulus), 1e-1 (discrete).
double success_threshold(Family family);
/// Solver tolerance used for the family's campaigns: 1e-2 (annulus), 1e-1 (discrete).
double default_tolerance(Family family);

/// FNV-1a of "family:dimension:instance"; stable across platforms and runs.
std::uint64_t instance_seed(Family family, int dimension, int instance);

struct BenchmarkRow {
  std::string family;
  int dimension = 0;
  int instance = 0;
  std::uint64_t seed = 0;
  Method method = Method::Reformulation;
  SolveStatus status = SolveStatus::NumericFailure;
  double objective = 0.0;
  double rel_error = 0.0;
  double wall_time_s = 0.0;
  bool success = false;
};

std::string csv_header();
std::string to_csv(const BenchmarkRow& row);

struct BenchmarkOptions {
  Family family = Family::Annulus;
  std::vector<int> dims;
  int instances = 4;
  std::vector<Method> methods{Method::Reformulation, Method::Original};
  SolverConfig solver;  // solver.tol is overwritten unless tol_override is set
  bool tol_override = false;
  int components = 2;
  int jobs = 1;
};

/// One (family, D, instance, method) solve.
///   reformulation: slackify -> build(L) -> solve from initial_point(seed); objective is the
///                  moment objective at the solution
///   original:      box-constrained solve of the problem itself from a uniform start
BenchmarkRow run_instance(Family family, int dimension, int instance, Method method,
                          const SolverConfig& cfg, int components = 2);

/// Runs every (D, instance, method) and returns the rows in that order. When `csv` is given,
/// the header and each row are written and flushed as soon as all earlier rows are done,
/// so the file is deterministic for any job count. Throws IoError when the stream fails.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkOptions& options,
                                        std::ostream* csv = nullptr);

struct SummaryRow {
  std::string family;
  int dimension = 0;
  Method method = Method::Reformulation;
  int runs = 0;
  int successes = 0;
  double success_fraction = 0.0;
  double mean_rel_error = 0.0;
  double median_rel_error = 0.0;
  double mean_time_s = 0.0;
  double median_time_s = 0.0;
};

struct Summary {
  std::vector<SummaryRow> rows;  // sorted by (family, dimension, method)
  /// Least-squares slope of log(mean time) vs log(D) for the reformulation, per family.
  std::map<std::string, double> reformulation_time_slope;
};

Summary summarize(const std::vector<BenchmarkRow>& rows);
std::string summary_csv(const Summary& summary);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace polymoment
