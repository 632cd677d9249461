#pragma once

#include <cstddef>
#include <vector>

namespace scedft::lp {

// min c'x  s.t.  A x = b,  0 <= x <= upper   (upper entries may be +inf).
// A is given column-wise (CSC). Rows with negative b are flipped internally.
struct Problem {
  int rows = 0;
  std::vector<double> cost;
  std::vector<double> upper;
  std::vector<double> rhs;
  std::vector<int> col_ptr;  // size n+1
  std::vector<int> row_idx;
  std::vector<double> val;

  int cols() const { return static_cast<int>(cost.size()); }
};

// Incremental column builder.
class ProblemBuilder {
 public:
  explicit ProblemBuilder(int rows) { p_.rows = rows; p_.col_ptr.push_back(0); }

  int add_column(double cost, double upper, const std::vector<std::pair<int, double>>& entries) {
    p_.cost.push_back(cost);
    p_.upper.push_back(upper);
    for (const auto& [r, v] : entries) {
      p_.row_idx.push_back(r);
      p_.val.push_back(v);
    }
    p_.col_ptr.push_back(static_cast<int>(p_.row_idx.size()));
    return p_.cols() - 1;
  }

  void set_rhs(std::vector<double> b) { p_.rhs = std::move(b); }
  Problem take() { return std::move(p_); }

 private:
  Problem p_;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
};

struct Options {
  long max_iterations = 2'000'000;
  double tol_dual = 1e-9;      // reduced cost threshold
  double tol_pivot = 1e-10;    // ratio-test pivot threshold
  double tol_feas = 1e-7;      // phase-1 residual threshold
  int refactor_every = 100;
};

// Deterministic revised simplex (Dantzig pricing with least-index ties,
// Bland fallback against cycling). Pricing uses the blocked parallel
// reduction, which is bitwise identical to the serial reference.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace scedft::lp
