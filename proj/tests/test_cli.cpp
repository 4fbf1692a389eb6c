#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "polymoment/bench.hpp"
#include "polymoment/problem_io.hpp"

using namespace polymoment;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("polymoment_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

// Exit code of the CLI with `args`; stdout goes to out.txt, stderr to err.txt.
int run(const std::string& args) {
  const std::string cmd = std::string("\"") + POLYMOMENT_CLI + "\" " + args + " >\"" +
                          path("out.txt") + "\" 2>\"" + path("err.txt") + "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& file) {
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("solve") == 1);
  CHECK(run("bench --family torus --dims 2 --out " + path("x.csv")) == 1);
  CHECK(run("bench --family annulus --dims 5:2 --out " + path("x.csv")) == 1);
  CHECK(run("bench --family annulus --dims 2 --methods sdp --out " + path("x.csv")) == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("gen writes a loadable problem") {
  REQUIRE(run("gen --family annulus --dimension 2 --out " + path("annulus2.json")) == 0);
  CHECK(load_problem(path("annulus2.json")) == gen_annulus(2));
  REQUIRE(run("gen --family discrete --dimension 3 --out " + path("discrete3.json")) == 0);
  CHECK(load_problem(path("discrete3.json")) == gen_discrete(3));
  CHECK(run("gen --family annulus --dimension 2 --out " + path("missing/dir/p.json")) == 3);
}

TEST_CASE("solve reports the optimum") {
  REQUIRE(run("gen --family annulus --dimension 2 --out " + path("annulus2.json")) == 0);
  REQUIRE(run("solve --problem " + path("annulus2.json") + " --seed 3 --out " + path("report.json")) == 0);
  const nlohmann::json rep = nlohmann::json::parse(slurp(path("report.json")));
  CHECK(rep["status"] == "Converged");
  CHECK(std::abs(rep["objective"].get<double>() + 1.21) <= 1e-2 * 1.21);
  CHECK(rep["config"]["L"] == 2);
  CHECK(rep["config"]["seed"] == 3);
  REQUIRE(rep["recovered"].is_object());
  CHECK(rep["recovered"]["location"].size() == 2);
  CHECK(rep["recovered"]["feasible"] == true);
  CHECK(std::abs(rep["recovered"]["value"].get<double>() + 1.21) <= 1e-1);

  // without --out the report goes to stdout
  REQUIRE(run("solve --problem " + path("annulus2.json") + " --seed 3 --polish") == 0);
  const nlohmann::json stdout_rep = nlohmann::json::parse(slurp(path("out.txt")));
  CHECK(stdout_rep["config"]["polish"] == true);
}

TEST_CASE("solve input errors") {
  CHECK(run("solve --problem " + path("does_not_exist.json")) == 3);
  std::ofstream(path("broken.json")) << "{\"dimension\": 2, \"objective\": [";
  CHECK(run("solve --problem " + path("broken.json")) == 3);
  CHECK(run("solve --problem " + path("broken.json") + " --L 0") == 1);
}

TEST_CASE("bench writes the CSV") {
  REQUIRE(run("bench --family discrete --dims 2:3 --instances 1 --methods reformulation,original --jobs 2 --out " +
              path("bench.csv")) == 0);
  std::istringstream csv(slurp(path("bench.csv")));
  std::string line;
  std::getline(csv, line);
  CHECK(line == csv_header());
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
  CHECK(slurp(path("out.txt")).find("family,dimension,method,runs") == 0);
  CHECK(run("bench --family discrete --dims 2 --instances 1 --out " + path("missing/dir/b.csv")) == 3);
}

TEST_CASE("oracle") {
  REQUIRE(run("gen --family annulus --dimension 2 --out " + path("annulus2.json")) == 0);
  REQUIRE(run("oracle --problem " + path("annulus2.json") + " --grid 401 --band 1e-2") == 0);
  const nlohmann::json out = nlohmann::json::parse(slurp(path("out.txt")));
  CHECK(std::abs(out["value"].get<double>() + 1.21) <= 2e-2);
  CHECK(run("oracle --problem " + path("annulus2.json") + " --grid 400 --band 0") == 2);
}
