#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "polymoment/poly.hpp"

namespace polymoment {

/// Parses the JSON problem format:
///   {"dimension": D,
///    "objective":    [{"exponents": [...], "coeff": c}, ...],
///    "equalities":   [[term, ...], ...],
///    "inequalities": [[term, ...], ...]}
/// Both constraint lists are optional. Errors carry the JSON path of the offending field.
ProblemSpec parse_problem(std::string_view text);

/// Terms in graded lex order, coefficients in shortest round-trip decimal form.
std::string serialize_problem(const ProblemSpec& problem);

ProblemSpec load_problem(const std::filesystem::path& path);
void save_problem(const ProblemSpec& problem, const std::filesystem::path& path);

}  // namespace polymoment
