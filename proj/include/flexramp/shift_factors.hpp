#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "flexramp/core.hpp"
#include "flexramp/grid.hpp"

namespace flexramp {

/// DC power-transfer distribution factors: row l, column b holds the MW
/// flow induced on line l (positive from `from` to `to`) by 1 MW injected
/// at bus b and withdrawn at the slack. The slack column is identically
/// zero. Throws on disconnected networks or nonpositive reactances.
inline Eigen::MatrixXd compute_shift_factors(const GridModel& model) {
  model.validate();
  const int nb = static_cast<int>(model.buses.size());
  const int nl = static_cast<int>(model.lines.size());
  const int slack = model.bus_index(model.slack_bus);

  // Reduced susceptance matrix over non-slack buses.
  Eigen::MatrixXd b_red = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
  const auto red = [&](int bus) { return bus < slack ? bus : bus - 1; };
  for (const auto& line : model.lines) {
    const double y = 1.0 / line.reactance;
    const int i = model.bus_index(line.from);
    const int j = model.bus_index(line.to);
    if (i != slack) b_red(red(i), red(i)) += y;
    if (j != slack) b_red(red(j), red(j)) += y;
    if (i != slack && j != slack) {
      b_red(red(i), red(j)) -= y;
      b_red(red(j), red(i)) -= y;
    }
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nl, nb);
  if (nb == 1) return h;

  // Angles per unit injection: theta columns solve B_red * theta = e_bus.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b_red);
  const Eigen::MatrixXd theta =
      lu.solve(Eigen::MatrixXd::Identity(nb - 1, nb - 1));
  if (!theta.allFinite())
    throw Error(Errc::numerical_failure, "susceptance system is singular");

  for (int l = 0; l < nl; ++l) {
    const double y = 1.0 / model.lines[l].reactance;
    const int i = model.bus_index(model.lines[l].from);
    const int j = model.bus_index(model.lines[l].to);
    for (int b = 0; b < nb; ++b) {
      if (b == slack) continue;
      const double ti = i == slack ? 0.0 : theta(red(i), red(b));
      const double tj = j == slack ? 0.0 : theta(red(j), red(b));
      h(l, b) = y * (ti - tj);
    }
  }
  return h;
}

}  // namespace flexramp
