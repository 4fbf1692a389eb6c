#include "polymoment/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <tuple>

#include "polymoment/direct.hpp"
#include "polymoment/errors.hpp"
#include "polymoment/recovery.hpp"
#include "polymoment/reformulation.hpp"

namespace polymoment {

std::string to_string(Family family) {
  return family == Family::Annulus ? "annulus" : "discrete";
}

std::string to_string(Method method) {
  return method == Method::Reformulation ? "reformulation" : "original";
}

Family parse_family(const std::string& name) {
  if (name == "annulus") return Family::Annulus;
  if (name == "discrete") return Family::Discrete;
  throw ArgumentError("unknown problem family '" + name + "'");
}

Method parse_method(const std::string& name) {
  if (name == "reformulation") return Method::Reformulation;
  if (name == "original") return Method::Original;
  throw ArgumentError("unknown method '" + name + "'");
}

ProblemSpec gen_annulus(int dimension) {
  if (dimension < 1) throw ArgumentError("gen_annulus: dimension must be positive");
  const int D = dimension;
  const SparsePoly x1 = SparsePoly::variable(D, 0);
  const SparsePoly shifted = x1 - 0.1;
  SparsePoly radius2(D);
  for (int i = 0; i < D; ++i) {
    const SparsePoly xi = SparsePoly::variable(D, i);
    radius2 = radius2 + xi * xi;
  }
  SparsePoly g = (radius2 - 1.0) * (radius2 - 0.25);
  return ProblemSpec(D, -(shifted * shifted), {std::move(g)});
}

ProblemSpec gen_discrete(int dimension) {
  if (dimension < 1) throw ArgumentError("gen_discrete: dimension must be positive");
  const int D = dimension;
  SparsePoly p(D);
  std::vector<SparsePoly> eqs;
  for (int i = 0; i < D; ++i) {
    const SparsePoly xi = SparsePoly::variable(D, i);
    const SparsePoly s = xi + 0.1;
    p = p - s * s;
    eqs.push_back((xi + 1.0 / 3.0) * xi * (xi - 2.0 / 3.0));
  }
  return ProblemSpec(D, std::move(p), std::move(eqs));
}

ProblemSpec generate(Family family, int dimension) {
  return family == Family::Annulus ? gen_annulus(dimension) : gen_discrete(dimension);
}

double known_optimum(Family family, int dimension) {
  return family == Family::Annulus ? -1.21 : -529.0 / 900.0 * dimension;
}

std::vector<double> known_minimizer(Family family, int dimension) {
  if (family == Family::Annulus) {
    std::vector<double> x(dimension, 0.0);
    x[0] = -1.0;
    return x;
  }
  return std::vector<double>(dimension, 2.0 / 3.0);
}

double success_threshold(Family family) { return family == Family::Annulus ? 1e-2 : 1e-1; }
double default_tolerance(Family family) { return family == Family::Annulus ? 1e-2 : 1e-1; }

std::uint64_t instance_seed(Family family, int dimension, int instance) {
  const std::string key =
      to_string(family) + ":" + std::to_string(dimension) + ":" + std::to_string(instance);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::VectorXd uniform_point(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

std::string csv_header() {
  return "family,dimension,instance,seed,method,status,objective,rel_error,wall_time_s,success";
}

std::string to_csv(const BenchmarkRow& r) {
  char time_buf[32];
  std::snprintf(time_buf, sizeof time_buf, "%.6f", r.wall_time_s);
  return r.family + "," + std::to_string(r.dimension) + "," + std::to_string(r.instance) + "," +
         std::to_string(r.seed) + "," + to_string(r.method) + "," + to_string(r.status) + "," +
         format_double(r.objective) + "," + format_double(r.rel_error) + "," + time_buf + "," +
         (r.success ? "1" : "0");
}

BenchmarkRow run_instance(Family family, int dimension, int instance, Method method,
                          const SolverConfig& cfg_in, int components) {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkRow row;
  row.family = to_string(family);
  row.dimension = dimension;
  row.instance = instance;
  row.seed = instance_seed(family, dimension, instance);
  row.method = method;

  SolverConfig cfg = cfg_in;
  cfg.seed = row.seed;
  const ProblemSpec original = generate(family, dimension);
  const ProblemSpec problem = slackify(original);
  const double optimum = known_optimum(family, dimension);

  double objective = std::numeric_limits<double>::quiet_NaN();
  if (method == Method::Reformulation) {
    ReformulationOptions opts;
    opts.components = components;
    const ReformulatedNlp nlp(problem, opts);
    const SolveReport rep = solve(nlp, nlp.initial_point(row.seed), std::nullopt, cfg,
                                  [&nlp](std::uint64_t s) { return nlp.initial_point(s); });
    row.status = rep.status;
    objective = rep.objective;
  } else {
    const DirectNlp nlp(problem);
    const SolveReport rep = solve(nlp, uniform_point(problem.dimension(), row.seed),
                                  nlp.hypercube_box(), cfg, [&problem](std::uint64_t s) {
                                    return uniform_point(problem.dimension(), s);
                                  });
    row.status = rep.status;
    objective = rep.objective;
  }
  row.objective = objective;
  row.rel_error = std::isfinite(objective) ? relative_error(objective, optimum)
                                           : std::numeric_limits<double>::infinity();
  row.success = row.status == SolveStatus::Converged && row.rel_error <= success_threshold(family);
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkOptions& options, std::ostream* csv) {
  if (options.dims.empty()) throw ArgumentError("run_benchmark: no dimensions given");
  if (options.instances < 1) throw ArgumentError("run_benchmark: need at least one instance");
  if (options.methods.empty()) throw ArgumentError("run_benchmark: no methods given");
  SolverConfig cfg = options.solver;
  if (!options.tol_override) cfg.tol = default_tolerance(options.family);
  cfg.validate();

  struct Task {
    int dimension, instance;
    Method method;
  };
  std::vector<Task> tasks;
  for (int D : options.dims) {
    if (D < 1) throw ArgumentError("run_benchmark: dimensions must be positive");
    for (int k = 0; k < options.instances; ++k) {
      for (Method m : options.methods) tasks.push_back({D, k, m});
    }
  }

  auto write_line = [csv](const std::string& line) {
    *csv << line << '\n';
    csv->flush();
    if (!*csv) throw IoError("run_benchmark: failed writing results");
  };
  if (csv) write_line(csv_header());

  auto run = [&](const Task& t) {
    return run_instance(options.family, t.dimension, t.instance, t.method, cfg,
                        options.components);
  };

  std::vector<BenchmarkRow> rows;
  rows.reserve(tasks.size());
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    for (const Task& t : tasks) {
      rows.push_back(run(t));
      if (csv) write_line(to_csv(rows.back()));
    }
    return rows;
  }

  std::vector<std::optional<BenchmarkRow>> results(tasks.size());
  std::exception_ptr failure;
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        BenchmarkRow row = run(tasks[t]);
        std::lock_guard lock(mu);
        results[t] = std::move(row);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
      ready.notify_all();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    // single writer: emit rows strictly in task order
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return results[t].has_value() || failure; });
      if (failure) break;
      rows.push_back(*results[t]);
      lock.unlock();
      if (csv) write_line(to_csv(rows.back()));
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ArgumentError("loglog_slope: need at least two paired samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw ArgumentError("loglog_slope: samples must be positive");
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ArgumentError("loglog_slope: x values are all equal");
  return (n * sxy - sx * sy) / denom;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Summary summarize(const std::vector<BenchmarkRow>& rows) {
  if (rows.empty()) throw ArgumentError("summarize: no rows");
  using Key = std::tuple<std::string, int, int>;
  std::map<Key, std::vector<const BenchmarkRow*>> groups;
  for (const auto& r : rows) groups[{r.family, r.dimension, static_cast<int>(r.method)}].push_back(&r);

  Summary s;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> timing;
  for (const auto& [key, members] : groups) {
    SummaryRow out;
    out.family = std::get<0>(key);
    out.dimension = std::get<1>(key);
    out.method = static_cast<Method>(std::get<2>(key));
    out.runs = static_cast<int>(members.size());
    std::vector<double> errs, times;
    for (const BenchmarkRow* r : members) {
      out.successes += r->success ? 1 : 0;
      errs.push_back(r->rel_error);
      times.push_back(r->wall_time_s);
    }
    out.success_fraction = static_cast<double>(out.successes) / out.runs;
    for (double e : errs) out.mean_rel_error += e / out.runs;
    for (double t : times) out.mean_time_s += t / out.runs;
    out.median_rel_error = median(errs);
    out.median_time_s = median(times);
    if (out.method == Method::Reformulation) {
      timing[out.family].first.push_back(out.dimension);
      timing[out.family].second.push_back(out.mean_time_s);
    }
    s.rows.push_back(std::move(out));
  }
  for (const auto& [family, xy] : timing) {
    if (xy.first.size() >= 2) s.reformulation_time_slope[family] = loglog_slope(xy.first, xy.second);
  }
  return s;
}

std::string summary_csv(const Summary& summary) {
  std::string out =
      "family,dimension,method,runs,successes,success_fraction,mean_rel_error,"
      "median_rel_error,mean_time_s,median_time_s\n";
  for (const auto& r : summary.rows) {
    out += r.family + "," + std::to_string(r.dimension) + "," + to_string(r.method) + "," +
           std::to_string(r.runs) + "," + std::to_string(r.successes) + "," +
           format_double(r.success_fraction) + "," + format_double(r.mean_rel_error) + "," +
           format_double(r.median_rel_error) + "," + format_double(r.mean_time_s) + "," +
           format_double(r.median_time_s) + "\n";
  }
  for (const auto& [family, slope] : summary.reformulation_time_slope) {
    out += "# " + family + " reformulation log-log time slope: " + format_double(slope) + "\n";
  }
  return out;
}

}  // namespace polymoment
