#include "scedft/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scedft/common.hpp"
#include "scedft/errors.hpp"
#include "scedft/parallel.hpp"

namespace scedft::lp {

namespace {

enum class VarState : unsigned char { at_lower, at_upper, basic };

class Simplex {
 public:
  Simplex(const Problem& p, const Options& opt) : p_(p), opt_(opt), m_(p.rows), n_(p.cols()) {
    // Normalize to b >= 0 by flipping row signs.
    b_ = p_.rhs;
    row_sign_.assign(m_, 1.0);
    for (int i = 0; i < m_; ++i) {
      if (b_[i] < 0.0) {
        row_sign_[i] = -1.0;
        b_[i] = -b_[i];
      }
    }
    n_total_ = n_ + m_;  // structurals + one artificial per row
    state_.assign(n_total_, VarState::at_lower);
    basic_.resize(m_);
    barred_.assign(n_total_, false);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    xb_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      state_[n_ + i] = VarState::basic;
      binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;
      xb_[i] = b_[i];
    }
  }

  Solution run() {
    Solution sol;
    // Phase 1: minimize the artificial sum.
    Status s1 = iterate(/*phase1=*/true);
    if (s1 == Status::iteration_limit) {
      sol.status = s1;
      sol.iterations = iterations_;
      return sol;
    }
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] >= n_) infeas += xb_[i];
    }
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) scale = std::max(scale, std::abs(b_[i]));
    if (infeas > opt_.tol_feas * scale) {
      sol.status = Status::infeasible;
      sol.iterations = iterations_;
      return sol;
    }
    drive_out_artificials();
    for (int j = n_; j < n_total_; ++j) barred_[j] = true;

    Status s2 = iterate(/*phase1=*/false);
    sol.status = s2;
    sol.iterations = iterations_;
    if (s2 != Status::optimal) return sol;

    refactor();
    sol.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == VarState::at_upper) sol.x[j] = p_.upper[j];
    }
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] < n_) sol.x[basic_[i]] = std::max(0.0, xb_[i]);
    }
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.cost[j] * sol.x[j];
    return sol;
  }

 private:
  double column_entry_sum(int col, const std::vector<double>& y) const {
    // y' A_col with the row sign normalization applied.
    if (col >= n_) {
      return y[col - n_];  // artificial: identity column
    }
    double acc = 0.0;
    for (int k = p_.col_ptr[col]; k < p_.col_ptr[col + 1]; ++k) {
      acc += y[p_.row_idx[k]] * p_.val[k] * row_sign_[p_.row_idx[k]];
    }
    return acc;
  }

  double obj_cost(int j, bool phase1) const {
    if (phase1) return j >= n_ ? 1.0 : 0.0;
    return j >= n_ ? 0.0 : p_.cost[j];
  }

  double upper_of(int j) const {
    if (j >= n_) return artificial_upper_[static_cast<std::size_t>(j - n_)];
    return p_.upper[j];
  }

  void compute_duals(bool phase1, std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = obj_cost(basic_[i], phase1);
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
  }

  // Entering-variable search. Dantzig rule (largest violation, least index on
  // ties) or Bland (least index) once anti-cycling kicks in. Runs as a
  // deterministic blocked reduction over the columns.
  int price(bool phase1, const std::vector<double>& y, bool bland) const {
    struct Best {
      double viol = 0.0;
      int j = -1;
    };
    auto scan = [&](std::size_t lo, std::size_t hi) {
      Best best;
      for (std::size_t u = lo; u < hi; ++u) {
        const int j = static_cast<int>(u);
        if (state_[j] == VarState::basic || barred_[j]) continue;
        const double d = obj_cost(j, phase1) - column_entry_sum(j, y);
        double viol = 0.0;
        if (state_[j] == VarState::at_lower) {
          viol = -d;
        } else {
          viol = d;
        }
        if (viol > opt_.tol_dual) {
          if (bland) {
            if (best.j < 0) best = {viol, j};
          } else if (viol > best.viol) {
            best = {viol, j};
          }
        }
      }
      return best;
    };
    Best overall = par::blocked_reduce<Best>(
        static_cast<std::size_t>(n_total_), 4096, Best{}, scan, [bland](Best a, Best b) {
          if (a.j < 0) return b;
          if (b.j < 0) return a;
          if (bland) return a.j < b.j ? a : b;
          if (b.viol > a.viol) return b;
          return a;  // ties keep the earlier (smaller) index
        });
    return overall.j;
  }

  void ftran(int col, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    if (col >= n_) {
      const int r = col - n_;
      for (int i = 0; i < m_; ++i) w[i] = binv_[static_cast<std::size_t>(i) * m_ + r];
      return;
    }
    for (int k = p_.col_ptr[col]; k < p_.col_ptr[col + 1]; ++k) {
      const int r = p_.row_idx[k];
      const double v = p_.val[k] * row_sign_[r];
      for (int i = 0; i < m_; ++i) w[i] += v * binv_[static_cast<std::size_t>(i) * m_ + r];
    }
  }

  void refactor() {
    // Rebuild B^{-1} by Gauss-Jordan with partial pivoting, then recompute
    // the basic values from scratch to shed accumulated drift.
    std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      if (j >= n_) {
        B[static_cast<std::size_t>(j - n_) * m_ + i] = 1.0;
      } else {
        for (int k = p_.col_ptr[j]; k < p_.col_ptr[j + 1]; ++k) {
          const int r = p_.row_idx[k];
          B[static_cast<std::size_t>(r) * m_ + i] += p_.val[k] * row_sign_[r];
        }
      }
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(B[static_cast<std::size_t>(col) * m_ + col]);
      for (int r = col + 1; r < m_; ++r) {
        const double v = std::abs(B[static_cast<std::size_t>(r) * m_ + col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-14) continue;  // should not happen; basis is nonsingular
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(B[static_cast<std::size_t>(piv) * m_ + k], B[static_cast<std::size_t>(col) * m_ + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * m_ + k], inv[static_cast<std::size_t>(col) * m_ + k]);
        }
      }
      const double d = B[static_cast<std::size_t>(col) * m_ + col];
      for (int k = 0; k < m_; ++k) {
        B[static_cast<std::size_t>(col) * m_ + k] /= d;
        inv[static_cast<std::size_t>(col) * m_ + k] /= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = B[static_cast<std::size_t>(r) * m_ + col];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          B[static_cast<std::size_t>(r) * m_ + k] -= f * B[static_cast<std::size_t>(col) * m_ + k];
          inv[static_cast<std::size_t>(r) * m_ + k] -= f * inv[static_cast<std::size_t>(col) * m_ + k];
        }
      }
    }
    // Rows of B were variables-in-basis columns; inv now holds the inverse of
    // the basis matrix in the (row, column) layout used throughout.
    // B was assembled with basis columns as matrix columns, so inv = B^{-1}
    // directly in row-major order.
    binv_ = std::move(inv);

    // xb = B^{-1} (b - sum_{j at upper} A_j u_j)
    std::vector<double> rhs = b_;
    for (int j = 0; j < n_total_; ++j) {
      if (state_[j] != VarState::at_upper) continue;
      const double u = upper_of(j);
      if (j >= n_) {
        rhs[j - n_] -= u;
      } else {
        for (int k = p_.col_ptr[j]; k < p_.col_ptr[j + 1]; ++k) {
          const int r = p_.row_idx[k];
          rhs[r] -= p_.val[k] * row_sign_[r] * u;
        }
      }
    }
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) acc += row[k] * rhs[k];
      xb_[i] = acc;
    }
  }

  void pivot_update(int row, const std::vector<double>& w) {
    const double piv = w[row];
    double* prow = &binv_[static_cast<std::size_t>(row) * m_];
    for (int k = 0; k < m_; ++k) prow[k] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row || w[i] == 0.0) continue;
      const double f = w[i];
      double* irow = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
    }
  }

  void drive_out_artificials() {
    artificial_upper_.assign(m_, kInf);
    std::vector<double> w;
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] < n_) continue;
      // Try to replace the zero-level artificial with a structural column.
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == VarState::basic) continue;
        double alpha = 0.0;
        const double* row = &binv_[static_cast<std::size_t>(i) * m_];
        for (int k = p_.col_ptr[j]; k < p_.col_ptr[j + 1]; ++k) {
          const int r = p_.row_idx[k];
          alpha += row[r] * p_.val[k] * row_sign_[r];
        }
        if (std::abs(alpha) > 1e-7) {
          enter = j;
          break;
        }
      }
      if (enter < 0) {
        // Redundant row: the artificial stays basic, pinned at zero.
        artificial_upper_[static_cast<std::size_t>(basic_[i] - n_)] = 0.0;
        continue;
      }
      ftran(enter, w);
      const int leaving = basic_[i];
      state_[enter] = VarState::basic;
      state_[leaving] = VarState::at_lower;
      artificial_upper_[static_cast<std::size_t>(leaving - n_)] = 0.0;
      basic_[i] = enter;
      pivot_update(i, w);
      xb_[i] = 0.0;
    }
  }

  Status iterate(bool phase1) {
    std::vector<double> y, w;
    bool bland = false;
    int degenerate_run = 0;
    int since_refactor = 0;
    if (artificial_upper_.empty()) artificial_upper_.assign(m_, kInf);
    while (iterations_ < opt_.max_iterations) {
      compute_duals(phase1, y);
      const int enter = price(phase1, y, bland);
      if (enter < 0) return Status::optimal;
      ++iterations_;

      ftran(enter, w);
      const double dir = state_[enter] == VarState::at_lower ? 1.0 : -1.0;

      // Ratio test over the basic variables plus the entering bound flip.
      // Ties prefer a basis change with the largest pivot magnitude, then the
      // smallest row index (loop order), which keeps the rule deterministic.
      double t_best = upper_of(enter);
      int leave_row = -1;
      bool leave_at_upper = false;
      double best_pivmag = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double wi = dir * w[i];
        double t;
        bool hits_upper;
        if (wi > opt_.tol_pivot) {
          t = std::max(0.0, xb_[i]) / wi;
          hits_upper = false;
        } else if (wi < -opt_.tol_pivot) {
          const double ub = upper_of(basic_[i]);
          if (std::isinf(ub)) continue;
          t = (ub - xb_[i]) / (-wi);
          hits_upper = true;
        } else {
          continue;
        }
        if (t < t_best - 1e-12 || (t <= t_best + 1e-12 && std::abs(wi) > best_pivmag)) {
          t_best = std::min(t, t_best);
          leave_row = i;
          leave_at_upper = hits_upper;
          best_pivmag = std::abs(wi);
        }
      }
      if (leave_row < 0 && std::isinf(t_best)) return Status::unbounded;
      const double step = std::max(0.0, t_best);

      // Anti-cycling: long degenerate runs switch pricing to Bland's rule.
      if (step <= 1e-13) {
        if (++degenerate_run > 50 + 5 * m_) bland = true;
      } else {
        degenerate_run = 0;
      }

      for (int i = 0; i < m_; ++i) xb_[i] -= step * dir * w[i];
      if (leave_row < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        state_[enter] = state_[enter] == VarState::at_lower ? VarState::at_upper : VarState::at_lower;
      } else {
        const int leaving = basic_[leave_row];
        state_[leaving] = leave_at_upper ? VarState::at_upper : VarState::at_lower;
        const double enter_value = dir > 0.0 ? step : upper_of(enter) - step;
        state_[enter] = VarState::basic;
        basic_[leave_row] = enter;
        xb_[leave_row] = enter_value;
        pivot_update(leave_row, w);
        if (++since_refactor >= opt_.refactor_every) {
          refactor();
          since_refactor = 0;
        }
      }
    }
    return Status::iteration_limit;
  }

  const Problem& p_;
  Options opt_;
  int m_, n_, n_total_;
  std::vector<double> b_, row_sign_;
  std::vector<int> basic_;
  std::vector<VarState> state_;
  std::vector<bool> barred_;
  std::vector<double> binv_, xb_;
  std::vector<double> artificial_upper_;
  long iterations_ = 0;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  if (problem.rhs.size() != static_cast<std::size_t>(problem.rows)) {
    throw invalid_argument_error("lp::solve: rhs size does not match row count");
  }
  if (problem.cols() == 0) {
    // Feasible iff b == 0.
    Solution sol;
    sol.status = Status::optimal;
    for (double bi : problem.rhs) {
      if (std::abs(bi) > options.tol_feas) sol.status = Status::infeasible;
    }
    return sol;
  }
  Simplex s(problem, options);
  return s.run();
}

}  // namespace scedft::lp
