#include "scedft/nelder_mead.hpp"

#include <algorithm>
#include <cmath>

#include "scedft/parallel.hpp"
#include "scedft/rng.hpp"

namespace scedft {

NmResult nelder_mead(const ObjectiveFn& fn, std::span<const double> x0, const NmOptions& opt) {
  const int n = static_cast<int>(x0.size());
  NmResult res;
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return fn(x);
  };

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> fv(n + 1);
  for (int i = 1; i <= n; ++i) simplex[i][i - 1] += opt.init_step;
  for (int i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<int> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  bool converged = false;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    double spread_f = std::abs(fv[worst] - fv[best]);
    double spread_x = 0.0;
    for (int i = 0; i < n; ++i) {
      spread_x = std::max(spread_x, std::abs(simplex[worst][i] - simplex[best][i]));
    }
    if (spread_f <= opt.f_tol && spread_x <= opt.x_tol) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (int k = 0; k < n; ++k) centroid[k] += simplex[i][k] / n;
    }
    for (int k = 0; k < n; ++k) xr[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      for (int k = 0; k < n; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const std::vector<double>& ref = outside ? xr : simplex[worst];
      for (int k = 0; k < n; ++k) xc[k] = centroid[k] + 0.5 * (ref[k] - centroid[k]);
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (int k = 0; k < n; ++k) {
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          }
          fv[i] = eval(simplex[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = simplex[best];
  res.f = fv[best];
  res.evaluations = evals;
  res.converged = converged;
  return res;
}

NmResult multistart_minimize(const ObjectiveFn& fn, std::span<const double> x0, const MultistartOptions& opt) {
  const int n = static_cast<int>(x0.size());
  const int restarts = std::max(1, opt.restarts);
  std::vector<NmResult> results(restarts);
  par::parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    std::vector<double> start(x0.begin(), x0.end());
    if (r > 0) {
      Rng rng(Rng::derive(opt.seed, r));
      for (int k = 0; k < n; ++k) {
        start[k] += rng.uniform(-opt.sample_halfwidth, opt.sample_halfwidth);
      }
    }
    results[r] = nelder_mead(fn, start, opt.nm);
  });
  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (results[r].f < results[best].f) best = r;
  }
  int total_evals = 0;
  for (const NmResult& r : results) total_evals += r.evaluations;
  NmResult out = results[best];
  out.evaluations = total_evals;
  return out;
}

}  // namespace scedft
