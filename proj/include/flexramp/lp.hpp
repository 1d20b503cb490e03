#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "flexramp/core.hpp"

namespace flexramp {

enum class Sense { minimize, maximize };
enum class LpStatus { optimal, infeasible, unbounded };

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Dense linear program with equality rows, `row . x <= rhs` inequality
/// rows, and per-variable bounds. Rows and variables carry opaque labels so
/// callers can locate specific constraints (e.g. a ramping-requirement
/// equality) in the solution's dual vectors.
struct LinearProgram {
  Sense sense = Sense::minimize;
  std::vector<double> cost;

  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ineq_rows;
  std::vector<double> ineq_rhs;

  std::vector<double> lower;
  std::vector<double> upper;

  std::vector<std::string> var_labels;
  std::vector<std::string> eq_labels;
  std::vector<std::string> ineq_labels;

  std::size_t num_vars() const { return cost.size(); }

  std::size_t add_variable(std::string label, double lo, double hi, double c) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    var_labels.push_back(std::move(label));
    return cost.size() - 1;
  }

  void add_eq(std::vector<double> row, double rhs, std::string label) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
    eq_labels.push_back(std::move(label));
  }

  void add_ineq(std::vector<double> row, double rhs, std::string label) {
    ineq_rows.push_back(std::move(row));
    ineq_rhs.push_back(rhs);
    ineq_labels.push_back(std::move(label));
  }

  int eq_index(std::string_view label) const {
    for (std::size_t i = 0; i < eq_labels.size(); ++i)
      if (eq_labels[i] == label) return static_cast<int>(i);
    return -1;
  }

  int ineq_index(std::string_view label) const {
    for (std::size_t i = 0; i < ineq_labels.size(); ++i)
      if (ineq_labels[i] == label) return static_cast<int>(i);
    return -1;
  }

  /// Throws Error(Errc::malformed_program) on arity mismatches, inverted
  /// bounds, non-finite data, or duplicate labels within a kind.
  void validate() const {
    const std::size_t n = num_vars();
    if (lower.size() != n || upper.size() != n)
      throw Error(Errc::malformed_program, "bound vectors do not match variable count");
    if (!var_labels.empty() && var_labels.size() != n)
      throw Error(Errc::malformed_program, "variable label count mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(cost[j]))
        throw Error(Errc::malformed_program, "non-finite cost coefficient");
      if (std::isnan(lower[j]) || std::isnan(upper[j]))
        throw Error(Errc::malformed_program, "NaN variable bound");
      if (lower[j] > upper[j])
        throw Error(Errc::malformed_program,
                    "variable lower bound exceeds upper bound: " + bound_name(j));
    }
    check_rows(eq_rows, eq_rhs, n, "equality");
    check_rows(ineq_rows, ineq_rhs, n, "inequality");
    check_labels(eq_labels, eq_rows.size(), "equality");
    check_labels(ineq_labels, ineq_rows.size(), "inequality");
    check_labels(var_labels, var_labels.empty() ? 0 : n, "variable");
  }

private:
  std::string bound_name(std::size_t j) const {
    if (j < var_labels.size() && !var_labels[j].empty()) return var_labels[j];
    return "x" + std::to_string(j);
  }

  static void check_rows(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& rhs, std::size_t n,
                         const char* kind) {
    if (rows.size() != rhs.size())
      throw Error(Errc::malformed_program,
                  std::string(kind) + " rhs count does not match row count");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != n)
        throw Error(Errc::malformed_program,
                    std::string(kind) + " row arity does not match variable count");
      if (!std::isfinite(rhs[i]))
        throw Error(Errc::malformed_program, std::string(kind) + " rhs not finite");
      for (double a : rows[i])
        if (!std::isfinite(a))
          throw Error(Errc::malformed_program,
                      std::string(kind) + " row coefficient not finite");
    }
  }

  static void check_labels(const std::vector<std::string>& labels,
                           std::size_t expected, const char* kind) {
    if (labels.empty() && expected == 0) return;
    std::unordered_set<std::string_view> seen;
    for (const auto& l : labels)
      if (!l.empty() && !seen.insert(l).second)
        throw Error(Errc::malformed_program,
                    std::string("duplicate ") + kind + " label: " + l);
  }
};

/// Solver output. `eq_duals` / `ineq_duals` follow the sensitivity
/// convention: the dual of a row equals the right-derivative of the optimal
/// objective with respect to that row's rhs, under the program's stated
/// sense. Primal, objective and duals are meaningful only when
/// status == optimal.
struct LpSolution {
  LpStatus status = LpStatus::optimal;
  std::vector<double> primal;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> eq_duals;
  std::vector<double> ineq_duals;
  int iterations = 0;
};

}  // namespace flexramp
