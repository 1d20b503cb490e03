#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flexramp {

/// Error categories surfaced by the library. Every thrown flexramp::Error
/// carries one of these so callers can branch without parsing messages.
enum class Errc {
  malformed_program,
  numerical_failure,
  disconnected_graph,
  nonpositive_reactance,
  negative_parameter,
  endpoint_infeasible,
  base_infeasible,
  out_of_region,
  no_feasible_pair,
  empty_band,
  empty_distribution,
  bad_input,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// Numerical tolerances shared across the pipeline. Values are in MW or
/// currency as appropriate; val_tol_rel and slope_tol scale with the
/// magnitude of the quantity being compared.
struct Tolerances {
  double feas_tol = 1e-7;     // absolute constraint violation
  double comp_tol = 1e-6;     // complementary slackness
  double val_tol_rel = 1e-6;  // value agreement, relative
  double slope_tol = 1e-6;    // slope comparison, relative
};

inline double value_tol(const Tolerances& tol, double scale) {
  return tol.val_tol_rel * std::max(1.0, std::abs(scale));
}

inline double slope_tol(const Tolerances& tol, double scale) {
  return tol.slope_tol * std::max(1.0, std::abs(scale));
}

}  // namespace flexramp
