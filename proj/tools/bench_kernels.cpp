// Timing comparison between the serial reference paths and the OpenMP
// kernels: cost tensor assembly, Sinkhorn marginal sweeps, LP pricing (via a
// full exact solve), and g_b tabulation. Results must match bitwise; the
// unit tests enforce that, this binary reports the speed side.

#include <chrono>
#include <cstdio>
#include <vector>

#include "scedft/gb.hpp"
#include "scedft/measures.hpp"
#include "scedft/mmot.hpp"
#include "scedft/parallel.hpp"
#include "scedft/rng.hpp"

using namespace scedft;

namespace {

DiscreteMeasure random_cloud(int n, unsigned seed) {
  Rng rng(seed);
  std::vector<Vec3> pts;
  std::vector<double> w(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    w[i] = rng.uniform(0.1, 1.0);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return {std::move(pts), std::move(w)};
}

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

template <class Fn>
void report(const char* name, int reps, Fn&& fn) {
  par::set_threads(1);
  const double serial = time_best_of(reps, fn);
  par::set_threads(0);
  const double parallel = time_best_of(reps, fn);
  std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  std::printf("kernel benchmarks (best of 3)\n");

  {
    const DiscreteMeasure rho = random_cloud(90, 7);
    const detail::TupleSpace space(90, 2);
    report("cost_tensor 90^2", 3, [&] {
      volatile double sink = detail::cost_tensor(rho, space, kInf)[10];
      (void)sink;
    });
  }
  {
    const DiscreteMeasure rho = random_cloud(60, 11);
    const detail::TupleSpace space(60, 2);
    par::set_threads(1);
    const std::vector<double> cost = detail::cost_tensor(rho, space, 1e4);
    par::set_threads(0);
    std::vector<std::vector<double>> f(2, std::vector<double>(60, 0.1));
    report("sinkhorn sweep 60^2", 3, [&] {
      std::vector<double> out;
      for (int i = 0; i < 2; ++i) detail::sinkhorn_slice_logsumexp(space, cost, f, i, 1e-2, out);
    });
  }
  {
    const DiscreteMeasure rho = random_cloud(80, 13);
    report("mmot_exact 80 points", 3, [&] {
      volatile double sink = mmot_exact(rho, 2).cost;
      (void)sink;
    });
  }
  {
    std::vector<double> alphas;
    for (int i = 0; i <= 10; ++i) alphas.push_back(0.1 * i);
    GbSearchConfig cfg;
    cfg.restarts = 4;
    report("gb_tabulate 11 alphas", 3, [&] {
      volatile double sink = gb_tabulate(1.0, 0.5, 2, alphas, cfg).values.back();
      (void)sink;
    });
  }
  return 0;
}
