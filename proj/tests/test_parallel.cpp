#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
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

// Runs fn under the serial reference and under the parallel path and
// demands bitwise-identical results.
template <class Fn>
auto serial_vs_parallel(Fn&& fn) {
  par::set_threads(1);
  auto serial = fn();
  par::set_threads(0);
  auto parallel = fn();
  par::set_threads(0);
  return std::pair{serial, parallel};
}

}  // namespace

TEST_CASE("blocked_reduce is schedule independent") {
  std::vector<double> data(10001);
  Rng rng(3);
  for (double& x : data) x = rng.uniform(-1, 1);
  auto sum_blocks = [&] {
    return par::blocked_reduce<double>(
        data.size(), 128, 0.0,
        [&](std::size_t lo, std::size_t hi) {
          double acc = 0.0;
          for (std::size_t i = lo; i < hi; ++i) acc += data[i];
          return acc;
        },
        [](double a, double b) { return a + b; });
  };
  const auto [serial, parallel] = serial_vs_parallel(sum_blocks);
  CHECK(serial == parallel);  // bitwise
}

TEST_CASE("sinkhorn marginal kernel bitwise equal") {
  const DiscreteMeasure rho = random_cloud(12, 17);
  const detail::TupleSpace space(12, 2);
  const std::vector<double> cost = [&] {
    par::set_threads(1);
    auto c = detail::cost_tensor(rho, space, 500.0);
    par::set_threads(0);
    return c;
  }();
  std::vector<std::vector<double>> f(2, std::vector<double>(12, 0.0));
  Rng rng(5);
  for (auto& fi : f) {
    for (double& x : fi) x = rng.uniform(-0.5, 0.5);
  }
  auto run = [&] {
    std::vector<double> out;
    detail::sinkhorn_slice_logsumexp(space, cost, f, 0, 1e-2, out);
    return out;
  };
  const auto [serial, parallel] = serial_vs_parallel(run);
  CHECK(serial == parallel);
}

TEST_CASE("cost tensor bitwise equal") {
  const DiscreteMeasure rho = random_cloud(9, 23);
  const detail::TupleSpace space(9, 3);
  auto run = [&] { return detail::cost_tensor(rho, space, kInf); };
  const auto [serial, parallel] = serial_vs_parallel(run);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    const bool eq = serial[i] == parallel[i] || (std::isinf(serial[i]) && std::isinf(parallel[i]));
    if (!eq) {
      CHECK(eq);
      break;
    }
  }
}

TEST_CASE("exact LP solve identical across thread counts") {
  const DiscreteMeasure rho = random_cloud(20, 31);
  auto run = [&] { return mmot_exact(rho, 2).cost; };
  const auto [serial, parallel] = serial_vs_parallel(run);
  CHECK(serial == parallel);
}

TEST_CASE("entropic solve identical across thread counts") {
  const DiscreteMeasure rho = random_cloud(10, 41);
  auto run = [&] {
    EntropicOptions opt;
    opt.reg = 5e-2;
    return mmot_entropic(rho, 2, opt).cost;
  };
  const auto [serial, parallel] = serial_vs_parallel(run);
  CHECK(serial == parallel);
}

TEST_CASE("gb tabulation identical across thread counts") {
  std::vector<double> alphas = {0.0, 0.3, 0.6, 0.9};
  GbSearchConfig cfg;
  cfg.restarts = 3;
  auto run = [&] { return gb_tabulate(1.0, 0.5, 2, alphas, cfg).values; };
  const auto [serial, parallel] = serial_vs_parallel(run);
  CHECK(serial == parallel);
}
