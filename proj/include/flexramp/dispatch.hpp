#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexramp/core.hpp"
#include "flexramp/grid.hpp"
#include "flexramp/lp.hpp"
#include "flexramp/shift_factors.hpp"
#include "flexramp/simplex.hpp"

namespace flexramp {

/// Cheapest dispatch meeting the predicted loads plus the requested up/down
/// ramping requirements, with the dual prices of those two requirement
/// equalities.
struct DispatchSolution {
  LpStatus status = LpStatus::optimal;
  double fu = 0.0;
  double fd = 0.0;
  std::vector<std::vector<double>> g;       // [t][generator], MW
  std::vector<std::vector<double>> r_up;    // [t-1][generator], t = 1..T-1
  std::vector<std::vector<double>> r_down;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double fu_dual = 0.0;  // d objective / d fu
  double fd_dual = 0.0;
};

namespace detail {

enum class DispatchKind { min_cost, max_up, max_down };

struct DispatchIndex {
  int gens = 0;
  int horizon = 0;
  int g(int n, int t) const { return t * gens + n; }
  int ru(int n, int t) const { return gens * horizon + (t - 1) * gens + n; }
  int rd(int n, int t) const {
    return gens * horizon + gens * (horizon - 1) + (t - 1) * gens + n;
  }
  int core_count() const { return gens * horizon + 2 * gens * (horizon - 1); }
};

// Shared constraint system for the cost-minimizing dispatch and for the two
// budget-constrained ramping maximizations. The ramping requirement is tied
// across all steps of the horizon: for max_up / max_down an auxiliary
// variable carries the common requirement and is maximized.
inline LinearProgram build_dispatch_lp(const GridModel& model, DispatchKind kind,
                                       std::optional<double> budget,
                                       std::optional<double> fu,
                                       std::optional<double> fd) {
  model.validate();
  if (fu && *fu < 0.0)
    throw Error(Errc::negative_parameter, "up-ramping requirement must be nonnegative");
  if (fd && *fd < 0.0)
    throw Error(Errc::negative_parameter, "down-ramping requirement must be nonnegative");
  if (budget && *budget < 0.0)
    throw Error(Errc::negative_parameter, "cost budget must be nonnegative");

  const int N = static_cast<int>(model.generators.size());
  const int T = model.horizon;
  const DispatchIndex ix{N, T};

  LinearProgram lp;
  for (int t = 0; t < T; ++t)
    for (int n = 0; n < N; ++n) {
      const auto& gen = model.generators[n];
      double lo = t == 0 ? std::max(gen.g_min, gen.initial_output - gen.ramp_limit) : 0.0;
      double hi = t == 0 ? std::min(gen.g_max, gen.initial_output + gen.ramp_limit)
                         : gen.g_max;
      lp.add_variable("g[" + gen.id + "," + std::to_string(t) + "]", lo, hi,
                      gen.energy_bid);
    }
  for (int t = 1; t < T; ++t)
    for (int n = 0; n < N; ++n)
      lp.add_variable("ru[" + model.generators[n].id + "," + std::to_string(t) + "]",
                      0.0, kInfinity, model.generators[n].ramp_up_bid);
  for (int t = 1; t < T; ++t)
    for (int n = 0; n < N; ++n)
      lp.add_variable("rd[" + model.generators[n].id + "," + std::to_string(t) + "]",
                      0.0, kInfinity, model.generators[n].ramp_down_bid);

  int aux = -1;
  if (kind != DispatchKind::min_cost)
    aux = static_cast<int>(lp.add_variable("f_total", 0.0, kInfinity, 0.0));
  const std::size_t nv = lp.num_vars();

  // Line flow limits, both directions, per step. Unlimited lines add no rows.
  if (model.has_line_limits()) {
    const Eigen::MatrixXd h = compute_shift_factors(model);
    for (int t = 0; t < T; ++t) {
      for (std::size_t l = 0; l < model.lines.size(); ++l) {
        if (!model.lines[l].capacity) continue;
        const double cap = *model.lines[l].capacity;
        double load_flow = 0.0;
        for (std::size_t b = 0; b < model.buses.size(); ++b)
          load_flow += h(l, b) * model.loads[t][b];
        std::vector<double> fwd(nv, 0.0);
        for (int n = 0; n < N; ++n)
          fwd[ix.g(n, t)] = h(l, model.bus_index(model.generators[n].bus));
        std::vector<double> rev(nv, 0.0);
        for (int n = 0; n < N; ++n) rev[ix.g(n, t)] = -fwd[ix.g(n, t)];
        const std::string tag = model.lines[l].from + "-" + model.lines[l].to +
                                "," + std::to_string(t) + "]";
        lp.add_ineq(std::move(fwd), cap + load_flow, "flow+[" + tag);
        lp.add_ineq(std::move(rev), cap - load_flow, "flow-[" + tag);
      }
    }
  }

  // Power balance per step.
  for (int t = 0; t < T; ++t) {
    std::vector<double> row(nv, 0.0);
    for (int n = 0; n < N; ++n) row[ix.g(n, t)] = 1.0;
    lp.add_eq(std::move(row), model.total_load(t), "balance[" + std::to_string(t) + "]");
  }

  // Ramping requirement totals per step, equal across the horizon.
  for (int t = 1; t < T; ++t) {
    std::vector<double> up(nv, 0.0), dn(nv, 0.0);
    for (int n = 0; n < N; ++n) {
      up[ix.ru(n, t)] = 1.0;
      dn[ix.rd(n, t)] = 1.0;
    }
    double up_rhs = 0.0, dn_rhs = 0.0;
    if (kind == DispatchKind::max_up)
      up[aux] = -1.0;
    else
      up_rhs = *fu;
    if (kind == DispatchKind::max_down)
      dn[aux] = -1.0;
    else
      dn_rhs = *fd;
    lp.add_eq(std::move(up), up_rhs, "fu[" + std::to_string(t) + "]");
    lp.add_eq(std::move(dn), dn_rhs, "fd[" + std::to_string(t) + "]");
  }

  // Awarded ramping must be deliverable within capacity.
  for (int t = 1; t < T; ++t)
    for (int n = 0; n < N; ++n) {
      const auto& gen = model.generators[n];
      const std::string tag = gen.id + "," + std::to_string(t) + "]";
      std::vector<double> up(nv, 0.0);
      up[ix.g(n, t)] = 1.0;
      up[ix.ru(n, t)] = 1.0;
      lp.add_ineq(std::move(up), gen.g_max, "cap_up[" + tag);
      std::vector<double> dn(nv, 0.0);
      dn[ix.g(n, t)] = -1.0;
      dn[ix.rd(n, t)] = 1.0;
      lp.add_ineq(std::move(dn), -gen.g_min, "cap_dn[" + tag);
    }

  // Worst-case step-to-step ramping: the planned move plus any awarded
  // ramping exercised against it stays within the generator's limit. The
  // t=0 move against the pre-horizon output is folded into the g[.,0]
  // bounds above.
  for (int t = 0; t + 1 < T; ++t)
    for (int n = 0; n < N; ++n) {
      const auto& gen = model.generators[n];
      const std::string tag = gen.id + "," + std::to_string(t) + "]";
      std::vector<double> up(nv, 0.0);
      up[ix.g(n, t + 1)] = 1.0;
      up[ix.g(n, t)] = -1.0;
      up[ix.ru(n, t + 1)] = 1.0;
      if (t >= 1) up[ix.rd(n, t)] = 1.0;
      std::vector<double> up_neg(nv, 0.0);
      for (std::size_t j = 0; j < nv; ++j) up_neg[j] = -up[j];
      lp.add_ineq(std::move(up), gen.ramp_limit, "wc_up+[" + tag);
      lp.add_ineq(std::move(up_neg), gen.ramp_limit, "wc_up-[" + tag);

      std::vector<double> dn(nv, 0.0);
      dn[ix.g(n, t + 1)] = 1.0;
      dn[ix.g(n, t)] = -1.0;
      dn[ix.rd(n, t + 1)] = -1.0;
      if (t >= 1) dn[ix.ru(n, t)] = -1.0;
      std::vector<double> dn_neg(nv, 0.0);
      for (std::size_t j = 0; j < nv; ++j) dn_neg[j] = -dn[j];
      lp.add_ineq(std::move(dn), gen.ramp_limit, "wc_dn+[" + tag);
      lp.add_ineq(std::move(dn_neg), gen.ramp_limit, "wc_dn-[" + tag);
    }

  if (kind == DispatchKind::min_cost) {
    lp.sense = Sense::minimize;
  } else {
    // Budget over the full dispatch objective; a small relative cushion
    // keeps budgets taken from previously solved costs feasible.
    if (budget) {
      std::vector<double> row(nv, 0.0);
      for (int t = 0; t < T; ++t)
        for (int n = 0; n < N; ++n) row[ix.g(n, t)] = model.generators[n].energy_bid;
      for (int t = 1; t < T; ++t)
        for (int n = 0; n < N; ++n) {
          row[ix.ru(n, t)] = model.generators[n].ramp_up_bid;
          row[ix.rd(n, t)] = model.generators[n].ramp_down_bid;
        }
      const double cushion = 1e-12 * std::max(1.0, std::abs(*budget));
      lp.add_ineq(std::move(row), *budget + cushion, "budget");
    }
    lp.sense = Sense::maximize;
    lp.cost.assign(nv, 0.0);
    lp.cost[aux] = 1.0;
  }
  return lp;
}

inline double labeled_eq_dual_sum(const LinearProgram& lp, const LpSolution& sol,
                                  std::string_view prefix) {
  double sum = 0.0;
  for (std::size_t i = 0; i < lp.eq_labels.size(); ++i)
    if (lp.eq_labels[i].starts_with(prefix)) sum += sol.eq_duals[i];
  return sum;
}

}  // namespace detail

/// Cost-minimizing dispatch program for ramping requirements (fu, fd).
inline LinearProgram build_minc_lp(const GridModel& model, double fu, double fd) {
  return detail::build_dispatch_lp(model, detail::DispatchKind::min_cost,
                                   std::nullopt, fu, fd);
}

/// Maximal deliverable up-ramping requirement given a total-cost budget and
/// a fixed down requirement. An absent budget relaxes the cost row.
inline LinearProgram build_maxur_lp(const GridModel& model,
                                    std::optional<double> budget, double fd) {
  return detail::build_dispatch_lp(model, detail::DispatchKind::max_up, budget,
                                   std::nullopt, fd);
}

/// Maximal deliverable down-ramping requirement given a budget and a fixed
/// up requirement.
inline LinearProgram build_maxdr_lp(const GridModel& model,
                                    std::optional<double> budget, double fu) {
  return detail::build_dispatch_lp(model, detail::DispatchKind::max_down, budget,
                                   fu, std::nullopt);
}

inline DispatchSolution solve_dispatch(const GridModel& model, double fu, double fd,
                                       const SimplexOptions& opts = {}) {
  const LinearProgram lp = build_minc_lp(model, fu, fd);
  const LpSolution sol = solve(lp, opts);

  DispatchSolution out;
  out.status = sol.status;
  out.fu = fu;
  out.fd = fd;
  if (sol.status != LpStatus::optimal) return out;

  const int N = static_cast<int>(model.generators.size());
  const int T = model.horizon;
  const detail::DispatchIndex ix{N, T};
  out.g.assign(T, std::vector<double>(N, 0.0));
  for (int t = 0; t < T; ++t)
    for (int n = 0; n < N; ++n) out.g[t][n] = sol.primal[ix.g(n, t)];
  out.r_up.assign(T - 1, std::vector<double>(N, 0.0));
  out.r_down.assign(T - 1, std::vector<double>(N, 0.0));
  for (int t = 1; t < T; ++t)
    for (int n = 0; n < N; ++n) {
      out.r_up[t - 1][n] = sol.primal[ix.ru(n, t)];
      out.r_down[t - 1][n] = sol.primal[ix.rd(n, t)];
    }
  out.objective = sol.objective;
  out.fu_dual = detail::labeled_eq_dual_sum(lp, sol, "fu[");
  out.fd_dual = detail::labeled_eq_dual_sum(lp, sol, "fd[");
  return out;
}

/// Arithmetic re-check of an optimal dispatch against the model's physical
/// constraints; throws Error(Errc::numerical_failure) past `feas_tol`.
inline void check_dispatch_feasible(const GridModel& model,
                                    const DispatchSolution& sol,
                                    double feas_tol = 1e-7) {
  if (sol.status != LpStatus::optimal)
    throw Error(Errc::bad_input, "cannot re-check a non-optimal dispatch");
  const int N = static_cast<int>(model.generators.size());
  const int T = model.horizon;
  const auto fail = [](const std::string& what) {
    throw Error(Errc::numerical_failure, "dispatch violates " + what);
  };

  for (int t = 0; t < T; ++t) {
    double total = 0.0;
    for (int n = 0; n < N; ++n) total += sol.g[t][n];
    if (std::abs(total - model.total_load(t)) > feas_tol) fail("power balance");
  }
  for (int t = 1; t < T; ++t) {
    double up = 0.0, dn = 0.0;
    for (int n = 0; n < N; ++n) {
      up += sol.r_up[t - 1][n];
      dn += sol.r_down[t - 1][n];
      if (sol.r_up[t - 1][n] < -feas_tol || sol.r_down[t - 1][n] < -feas_tol)
        fail("award nonnegativity");
    }
    if (std::abs(up - sol.fu) > feas_tol) fail("up requirement total");
    if (std::abs(dn - sol.fd) > feas_tol) fail("down requirement total");
  }
  for (int n = 0; n < N; ++n) {
    const auto& gen = model.generators[n];
    if (std::abs(sol.g[0][n] - gen.initial_output) > gen.ramp_limit + feas_tol)
      fail("initial ramp limit");
    for (int t = 0; t < T; ++t) {
      const double ru = t >= 1 ? sol.r_up[t - 1][n] : 0.0;
      const double rd = t >= 1 ? sol.r_down[t - 1][n] : 0.0;
      if (sol.g[t][n] + ru > gen.g_max + feas_tol) fail("capacity headroom");
      if (sol.g[t][n] - rd < gen.g_min - feas_tol) fail("capacity floor");
      if (sol.g[t][n] < -feas_tol) fail("output nonnegativity");
    }
    for (int t = 0; t + 1 < T; ++t) {
      const double ru_next = sol.r_up[t][n];
      const double rd_next = sol.r_down[t][n];
      const double ru_here = t >= 1 ? sol.r_up[t - 1][n] : 0.0;
      const double rd_here = t >= 1 ? sol.r_down[t - 1][n] : 0.0;
      const double move = sol.g[t + 1][n] - sol.g[t][n];
      if (std::abs(move + ru_next + rd_here) > gen.ramp_limit + feas_tol)
        fail("worst-case up ramp");
      if (std::abs(move - rd_next - ru_here) > gen.ramp_limit + feas_tol)
        fail("worst-case down ramp");
    }
  }
  if (model.has_line_limits()) {
    const Eigen::MatrixXd h = compute_shift_factors(model);
    for (int t = 0; t < T; ++t)
      for (std::size_t l = 0; l < model.lines.size(); ++l) {
        if (!model.lines[l].capacity) continue;
        double flow = 0.0;
        for (int n = 0; n < N; ++n)
          flow += h(l, model.bus_index(model.generators[n].bus)) * sol.g[t][n];
        for (std::size_t b = 0; b < model.buses.size(); ++b)
          flow -= h(l, b) * model.loads[t][b];
        if (std::abs(flow) > *model.lines[l].capacity + feas_tol) fail("line limit");
      }
  }
}

}  // namespace flexramp
