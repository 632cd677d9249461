#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace scedft {

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct NmOptions {
  int max_iter = 2000;
  double f_tol = 1e-12;
  double x_tol = 1e-10;
  double init_step = 0.5;
};

struct NmResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Standard Nelder-Mead simplex (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2), deterministic for a fixed start.
NmResult nelder_mead(const ObjectiveFn& fn, std::span<const double> x0, const NmOptions& opt = {});

struct MultistartOptions {
  NmOptions nm;
  int restarts = 20;
  std::uint64_t seed = 42;
  double sample_halfwidth = 2.0;  // restart starts: x0 + uniform cube around it
};

// Restarts run in parallel with per-restart seeds derived from the master
// seed; the winner is selected serially in restart order, so the result does
// not depend on the thread count. Ties prefer the earlier restart.
NmResult multistart_minimize(const ObjectiveFn& fn, std::span<const double> x0, const MultistartOptions& opt = {});

}  // namespace scedft
