#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "flexramp/core.hpp"
#include "flexramp/lp.hpp"

namespace flexramp {

struct SimplexOptions {
  double feas_tol = 1e-7;    // absolute primal feasibility
  double opt_tol = 1e-9;     // reduced-cost threshold, scaled by cost magnitude
  double pivot_tol = 1e-10;  // smallest pivot accepted in the ratio test
  int max_iters = 50000;
};

namespace detail {

enum class VarState : unsigned char { basic, at_lower, at_upper, free_nonbasic };

// Two-phase primal simplex over bounded variables. Inequalities get slack
// columns, every row gets a phase-1 artificial. The basis is refactorized
// each iteration (problems here are small and dense), which keeps the
// arithmetic deterministic and well conditioned. Dantzig pricing with a
// permanent switch to Bland's rule after a fixed iteration budget guards
// against cycling on degenerate dispatch programs.
class BoundedSimplex {
public:
  BoundedSimplex(const LinearProgram& lp, const SimplexOptions& opts)
      : opts_(opts), maximize_(lp.sense == Sense::maximize) {
    n_struct_ = static_cast<int>(lp.num_vars());
    m_eq_ = static_cast<int>(lp.eq_rows.size());
    m_in_ = static_cast<int>(lp.ineq_rows.size());
    m_ = m_eq_ + m_in_;
    n_all_ = n_struct_ + m_in_ + m_;  // structurals + slacks + artificials

    A_.setZero(m_, n_all_);
    b_.resize(m_);
    for (int i = 0; i < m_eq_; ++i) {
      for (int j = 0; j < n_struct_; ++j) A_(i, j) = lp.eq_rows[i][j];
      b_[i] = lp.eq_rhs[i];
    }
    for (int k = 0; k < m_in_; ++k) {
      const int i = m_eq_ + k;
      for (int j = 0; j < n_struct_; ++j) A_(i, j) = lp.ineq_rows[k][j];
      A_(i, n_struct_ + k) = 1.0;  // slack
      b_[i] = lp.ineq_rhs[k];
    }

    const double sign = maximize_ ? -1.0 : 1.0;
    cost_.assign(n_all_, 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = sign * lp.cost[j];

    lb_.assign(n_all_, 0.0);
    ub_.assign(n_all_, kInfinity);
    for (int j = 0; j < n_struct_; ++j) {
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
    }

    b_scale_ = 1.0;
    for (int i = 0; i < m_; ++i) b_scale_ = std::max(b_scale_, std::abs(b_[i]));
  }

  LpSolution run() {
    LpSolution out;
    if (!phase_one()) {
      out.status = LpStatus::infeasible;
      out.iterations = iters_;
      return out;
    }
    const Phase r = iterate(cost_);
    if (r == Phase::unbounded) {
      out.status = LpStatus::unbounded;
      out.objective = maximize_ ? kInfinity : -kInfinity;
      out.iterations = iters_;
      return out;
    }

    out.status = LpStatus::optimal;
    out.iterations = iters_;
    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) obj += cost_[j] * x_[j];
    out.objective = maximize_ ? -obj : obj;

    out.primal.assign(x_.begin(), x_.begin() + n_struct_);
    const double dual_sign = maximize_ ? -1.0 : 1.0;
    out.eq_duals.resize(m_eq_);
    out.ineq_duals.resize(m_in_);
    for (int i = 0; i < m_eq_; ++i) out.eq_duals[i] = dual_sign * y_[i];
    for (int k = 0; k < m_in_; ++k) out.ineq_duals[k] = dual_sign * y_[m_eq_ + k];

    check_primal();
    return out;
  }

private:
  enum class Phase { optimal, unbounded };

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  int art_col(int row) const { return n_struct_ + m_in_ + row; }

  bool phase_one() {
    x_.assign(n_all_, 0.0);
    state_.assign(n_all_, VarState::at_lower);
    for (int j = 0; j < n_struct_ + m_in_; ++j) {
      const bool lo = std::isfinite(lb_[j]);
      const bool hi = std::isfinite(ub_[j]);
      if (lo && hi) {
        if (std::abs(lb_[j]) <= std::abs(ub_[j])) {
          state_[j] = VarState::at_lower;
          x_[j] = lb_[j];
        } else {
          state_[j] = VarState::at_upper;
          x_[j] = ub_[j];
        }
      } else if (lo) {
        state_[j] = VarState::at_lower;
        x_[j] = lb_[j];
      } else if (hi) {
        state_[j] = VarState::at_upper;
        x_[j] = ub_[j];
      } else {
        state_[j] = VarState::free_nonbasic;
        x_[j] = 0.0;
      }
    }

    basis_.resize(m_);
    Eigen::VectorXd resid = b_;
    for (int j = 0; j < n_struct_ + m_in_; ++j)
      if (x_[j] != 0.0) resid -= A_.col(j) * x_[j];
    for (int i = 0; i < m_; ++i) {
      const int a = art_col(i);
      A_(i, a) = resid[i] >= 0.0 ? 1.0 : -1.0;
      x_[a] = std::abs(resid[i]);
      state_[a] = VarState::basic;
      basis_[i] = a;
    }

    std::vector<double> phase1_cost(n_all_, 0.0);
    for (int i = 0; i < m_; ++i) phase1_cost[art_col(i)] = 1.0;
    if (iterate(phase1_cost) == Phase::unbounded)
      throw Error(Errc::numerical_failure, "phase-1 objective unbounded");

    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) infeas += x_[art_col(i)];
    if (infeas > opts_.feas_tol * std::max(1.0, 1e-4 * b_scale_)) return false;

    drive_out_artificials();
    for (int i = 0; i < m_; ++i) {
      const int a = art_col(i);
      lb_[a] = 0.0;
      ub_[a] = 0.0;
      if (state_[a] != VarState::basic) {
        state_[a] = VarState::at_lower;
        x_[a] = 0.0;
      }
    }
    return true;
  }

  // Swap basic artificials for structural/slack columns where a usable pivot
  // exists; rows with no pivot are redundant and keep their artificial basic
  // at value zero.
  void drive_out_artificials() {
    for (int k = 0; k < m_; ++k) {
      if (basis_[k] < n_struct_ + m_in_) continue;
      factorize();
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
      e[k] = 1.0;
      const Eigen::VectorXd z = luT_.solve(e);  // row k of B^{-1}
      int best = -1;
      double best_piv = 1e-7;
      for (int j = 0; j < n_struct_ + m_in_; ++j) {
        if (state_[j] == VarState::basic) continue;
        const double piv = std::abs(z.dot(A_.col(j)));
        if (piv > best_piv) {
          best_piv = piv;
          best = j;
        }
      }
      if (best >= 0) {
        const int a = basis_[k];
        basis_[k] = best;
        state_[best] = VarState::basic;
        state_[a] = VarState::at_lower;
        x_[a] = 0.0;
      }
    }
  }

  void factorize() {
    if (m_ == 0) return;
    Eigen::MatrixXd B(m_, m_);
    for (int k = 0; k < m_; ++k) B.col(k) = A_.col(basis_[k]);
    lu_.compute(B);
    luT_.compute(B.transpose());
  }

  Phase iterate(const std::vector<double>& c) {
    double c_scale = 1.0;
    for (double v : c) c_scale = std::max(c_scale, std::abs(v));
    const double dual_tol = opts_.opt_tol * c_scale;
    const int bland_after = iters_ + 2000 + 40 * (m_ + n_all_);

    for (;;) {
      if (++iters_ > opts_.max_iters)
        throw Error(Errc::numerical_failure, "simplex iteration limit exceeded");
      const bool bland = iters_ > bland_after;

      factorize();
      y_.setZero(m_);
      if (m_ > 0) {
        Eigen::VectorXd cb(m_);
        for (int k = 0; k < m_; ++k) cb[k] = c[basis_[k]];
        y_ = luT_.solve(cb);
      }

      int enter = -1, dir = 0;
      double best_viol = 0.0;
      for (int j = 0; j < n_all_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed column
        const double d = c[j] - (m_ > 0 ? y_.dot(A_.col(j)) : 0.0);
        double viol = 0.0;
        int s = 0;
        switch (state_[j]) {
          case VarState::at_lower:
            if (d < -dual_tol) { viol = -d; s = 1; }
            break;
          case VarState::at_upper:
            if (d > dual_tol) { viol = d; s = -1; }
            break;
          case VarState::free_nonbasic:
            if (std::abs(d) > dual_tol) { viol = std::abs(d); s = d < 0 ? 1 : -1; }
            break;
          case VarState::basic:
            break;
        }
        if (s == 0) continue;
        if (bland) { enter = j; dir = s; break; }
        if (viol > best_viol * (1.0 + 1e-12)) {
          best_viol = viol;
          enter = j;
          dir = s;
        }
      }
      if (enter < 0) return Phase::optimal;

      Eigen::VectorXd w =
          m_ > 0 ? Eigen::VectorXd(lu_.solve(A_.col(enter))) : Eigen::VectorXd();
      if (m_ > 0 && !w.allFinite())
        throw Error(Errc::numerical_failure, "singular basis in simplex");

      // Ratio test: entering variable's own range competes with each basic
      // variable's distance to the bound it is pushed toward.
      double step = kInfinity;
      if (std::isfinite(lb_[enter]) && std::isfinite(ub_[enter]))
        step = ub_[enter] - lb_[enter];
      int leave = -1;
      bool leave_upper = false;
      double leave_piv = 0.0;
      for (int k = 0; k < m_; ++k) {
        const double wk = dir * w[k];
        const int v = basis_[k];
        double cand;
        bool to_upper;
        if (wk > opts_.pivot_tol) {
          if (!std::isfinite(lb_[v])) continue;
          cand = (x_[v] - lb_[v]) / wk;
          to_upper = false;
        } else if (wk < -opts_.pivot_tol) {
          if (!std::isfinite(ub_[v])) continue;
          cand = (x_[v] - ub_[v]) / wk;
          to_upper = true;
        } else {
          continue;
        }
        cand = std::max(cand, 0.0);
        const double tie = 1e-9 * (1.0 + std::abs(cand));
        if (cand < step - tie) {
          step = cand;
          leave = k;
          leave_upper = to_upper;
          leave_piv = std::abs(wk);
        } else if (cand < step + tie && leave >= 0) {
          const bool better = bland ? basis_[k] < basis_[leave]
                                    : std::abs(wk) > leave_piv;
          if (better) {
            leave = k;
            leave_upper = to_upper;
            leave_piv = std::abs(wk);
          }
        }
      }
      if (!std::isfinite(step)) return Phase::unbounded;

      if (step > 0.0) {
        x_[enter] += dir * step;
        for (int k = 0; k < m_; ++k) x_[basis_[k]] -= dir * step * w[k];
      }
      if (leave < 0) {
        // Bound flip: the entering variable crossed its own range.
        state_[enter] = dir > 0 ? VarState::at_upper : VarState::at_lower;
        x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
      } else {
        const int v = basis_[leave];
        state_[v] = leave_upper ? VarState::at_upper : VarState::at_lower;
        x_[v] = leave_upper ? ub_[v] : lb_[v];
        basis_[leave] = enter;
        state_[enter] = VarState::basic;
      }
    }
  }

  void check_primal() const {
    const double tol = std::max(opts_.feas_tol * 10.0, 1e-9 * b_scale_);
    for (int i = 0; i < m_; ++i) {
      double ax = 0.0;
      for (int j = 0; j < n_all_; ++j)
        if (x_[j] != 0.0) ax += A_(i, j) * x_[j];
      const double viol = i < m_eq_ ? std::abs(ax - b_[i]) : ax - b_[i];
      if (viol > tol)
        throw Error(Errc::numerical_failure, "solution failed primal feasibility check");
    }
    for (int j = 0; j < n_struct_; ++j)
      if (x_[j] < lb_[j] - tol || x_[j] > ub_[j] + tol)
        throw Error(Errc::numerical_failure, "solution violates a variable bound");
  }

  SimplexOptions opts_;
  bool maximize_;
  int n_struct_ = 0, m_eq_ = 0, m_in_ = 0, m_ = 0, n_all_ = 0;
  double b_scale_ = 1.0;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<double> cost_, lb_, ub_, x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_, luT_;
  Eigen::VectorXd y_;
  int iters_ = 0;
};

}  // namespace detail

/// Solve a validated linear program. Throws Error(Errc::malformed_program)
/// on contract violations and Error(Errc::numerical_failure) when no status
/// can be certified. Solves are pure: concurrent calls share nothing.
inline LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {}) {
  lp.validate();
  detail::BoundedSimplex simplex(lp, opts);
  return simplex.run();
}

}  // namespace flexramp
