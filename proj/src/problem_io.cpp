#include "polymoment/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polymoment/errors.hpp"

namespace polymoment {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path, std::string("missing field '") + key + "'");
  return *it;
}

SparsePoly parse_poly(const json& terms, int dim, const std::string& path) {
  if (!terms.is_array()) throw ParseError(path, "expected an array of terms");
  SparsePoly::TermMap acc;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tpath = path + "[" + std::to_string(t) + "]";
    const json& term = terms[t];
    if (!term.is_object()) throw ParseError(tpath, "expected a term object");
    const json& exps = require(term, "exponents", tpath);
    if (!exps.is_array()) throw ParseError(tpath + ".exponents", "expected an array");
    if (static_cast<int>(exps.size()) != dim) {
      throw ParseError(tpath + ".exponents", "length " + std::to_string(exps.size()) +
                                                 " does not match dimension " +
                                                 std::to_string(dim));
    }
    MultiIndex n(dim);
    for (int i = 0; i < dim; ++i) {
      const json& e = exps[i];
      if (!e.is_number_integer() || e.get<long long>() < 0 || e.get<long long>() > 1'000'000) {
        throw ParseError(tpath + ".exponents[" + std::to_string(i) + "]",
                         "expected a nonnegative integer exponent");
      }
      n[i] = static_cast<int>(e.get<long long>());
    }
    const json& coeff = require(term, "coeff", tpath);
    if (!coeff.is_number()) throw ParseError(tpath + ".coeff", "expected a number");
    const double c = coeff.get<double>();
    if (!std::isfinite(c)) throw ParseError(tpath + ".coeff", "coefficient overflow");
    auto [it, inserted] = acc.try_emplace(n, c);
    if (!inserted) it->second += c;
  }
  return SparsePoly(dim, std::move(acc));
}

std::vector<SparsePoly> parse_poly_list(const json& root, const char* key, int dim) {
  std::vector<SparsePoly> out;
  auto it = root.find(key);
  if (it == root.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(key, "expected an array of polynomials");
  for (std::size_t j = 0; j < it->size(); ++j) {
    out.push_back(parse_poly((*it)[j], dim, std::string(key) + "[" + std::to_string(j) + "]"));
  }
  return out;
}

json poly_to_json(const SparsePoly& p) {
  json terms = json::array();
  for (const auto& [n, c] : p.terms()) terms.push_back({{"exponents", n}, {"coeff", c}});
  return terms;
}

}  // namespace

ProblemSpec parse_problem(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  } catch (const json::out_of_range& e) {
    throw ParseError("number", std::string("coefficient overflow: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("$", "expected a JSON object");
  const json& jd = require(root, "dimension", "$");
  if (!jd.is_number_integer() || jd.get<long long>() < 1 || jd.get<long long>() > 100000) {
    throw ParseError("dimension", "expected a positive integer");
  }
  const int dim = static_cast<int>(jd.get<long long>());
  SparsePoly objective = parse_poly(require(root, "objective", "$"), dim, "objective");
  return ProblemSpec(dim, std::move(objective), parse_poly_list(root, "equalities", dim),
                     parse_poly_list(root, "inequalities", dim));
}

std::string serialize_problem(const ProblemSpec& problem) {
  json root;
  root["dimension"] = problem.dimension();
  root["objective"] = poly_to_json(problem.objective());
  root["equalities"] = json::array();
  for (const auto& g : problem.equalities()) root["equalities"].push_back(poly_to_json(g));
  root["inequalities"] = json::array();
  for (const auto& h : problem.inequalities()) root["inequalities"].push_back(poly_to_json(h));
  return root.dump(2) + "\n";
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

void save_problem(const ProblemSpec& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write problem file " + path.string());
  out << serialize_problem(problem);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace polymoment
