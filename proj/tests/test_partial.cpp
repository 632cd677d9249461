#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scedft/errors.hpp"
#include "scedft/measures.hpp"
#include "scedft/mmot.hpp"
#include "scedft/partial.hpp"
#include "scedft/rng.hpp"

using namespace scedft;

namespace {

DiscreteMeasure weighted_pair(double wa, double wb, double d = 2.0) {
  return DiscreteMeasure({{0, 0, 0}, {d, 0, 0}}, {wa, wb});
}

}  // namespace

TEST_CASE("partial cost basics") {
  DiscreteMeasure rho = weighted_pair(0.6, 0.4);
  CHECK(partial_cost(rho, 0.0, 2) == 0.0);

  // m = 0.2: the optimal mu must split evenly or the plan hits the diagonal.
  const PartialResult res = partial_cost_full(rho, 0.2, 2);
  CHECK(res.cost == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(res.mu[0] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(res.mu[1] == doctest::Approx(0.1).epsilon(1e-9));

  // m = full mass on a probability: mu = rho forced, diagonal forced, +inf.
  CHECK(std::isinf(partial_cost(rho, 1.0, 2)));
  CHECK_THROWS_AS(partial_cost(rho, 1.5, 2), Error);
}

TEST_CASE("partial cost monotone and convex in m") {
  Rng rng(77);
  std::vector<Vec3> pts;
  std::vector<double> w;
  for (int i = 0; i < 4; ++i) {
    pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    w.push_back(0.22);
  }
  DiscreteMeasure rho(pts, w);
  std::vector<double> ms = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> vals;
  for (double m : ms) vals.push_back(partial_cost(rho, m, 2));
  for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] >= vals[i - 1] - 1e-10);
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    CHECK(vals[i + 1] + vals[i - 1] >= 2.0 * vals[i] - 1e-9);
  }
}

TEST_CASE("relaxed envelope N=2") {
  // mass 0.5 -> zero envelope
  CHECK(relaxed_envelope_n2(weighted_pair(0.25, 0.25)) == 0.0);
  // probability -> equals the full cost
  DiscreteMeasure prob = weighted_pair(0.5, 0.5);
  CHECK(relaxed_envelope_n2(prob) == mmot_exact(prob, 2).cost);
  // mass 0.6 instance: optimal mu = (0.1, 0.1), envelope 0.1 at d = 2
  DiscreteMeasure sub = weighted_pair(0.36, 0.24);
  CHECK(relaxed_envelope_n2(sub) == doctest::Approx(0.1).epsilon(1e-9));
  // strictly positive only above mass 1/2
  CHECK(relaxed_envelope_n2(weighted_pair(0.3, 0.18)) == 0.0);
  CHECK(relaxed_envelope_n2(weighted_pair(0.31, 0.21)) > 0.0);
}

TEST_CASE("relaxed envelope is below the extended cost") {
  Rng rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Vec3> pts;
    std::vector<double> w;
    const int n = 3 + static_cast<int>(rng.uniform_index(3));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
      w.push_back(rng.uniform(0.05, 0.3));
      sum += w.back();
    }
    const double target = rng.uniform(0.55, 0.95);
    for (double& x : w) x *= target / sum;
    DiscreteMeasure rho(pts, w);
    const double env = relaxed_envelope_n2(rho);
    const double full = mmot_exact(rho, 2).cost;
    CHECK(env <= full + 1e-10);
  }
}

TEST_CASE("relaxed envelope general N") {
  // mass <= 1/N -> 0
  DiscreteMeasure third({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {0.1, 0.1, 0.1});
  CHECK(relaxed_envelope_upper(third, 3) == 0.0);
  // N = 2 coincides with the dedicated formula
  DiscreteMeasure sub = weighted_pair(0.36, 0.24);
  CHECK(relaxed_envelope_upper(sub, 2) == relaxed_envelope_n2(sub));
  // N = 3 at mass 0.6: the constraint mass is (3/2)(0.6 - 1/3) = 0.4
  DiscreteMeasure rho({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}, {0.2, 0.2, 0.2});
  const PartialResult direct = partial_cost_full(rho, 0.4, 3);
  CHECK(relaxed_envelope_upper(rho, 3) == doctest::Approx(direct.cost));
}

TEST_CASE("translated copies build a probability and converge at 1/n") {
  DiscreteMeasure rho = weighted_pair(0.36, 0.24);
  const PartialResult pr = partial_cost_full(rho, 0.2, 2);
  DiscreteMeasure mu(rho.points(), pr.mu);
  const std::vector<Vec3> dirs = default_directions(rho, 2);
  REQUIRE(dirs.size() == 1);

  const double envelope = pr.cost;
  double k_const = 0.0;  // N sum ||nu|| / |xi|
  k_const = 2.0 * (rho.mass() - mu.mass()) / norm(dirs[0]);

  double prev_excess = kInf;
  for (int n : {10, 20, 40}) {
    DiscreteMeasure rho_n = translated_copies(rho, mu, n, dirs);
    CHECK(rho_n.mass() == doctest::Approx(1.0).epsilon(1e-12));
    const double cost = mmot_exact(rho_n, 2).cost;
    const double excess = cost - envelope;
    CHECK(excess > 0.0);
    CHECK(excess <= k_const / n + 1e-9);
    CHECK(excess < prev_excess);
    prev_excess = excess;
  }
}

TEST_CASE("translated copies identity when mu = rho") {
  DiscreteMeasure rho = weighted_pair(0.3, 0.3);
  const std::vector<Vec3> dirs = default_directions(rho, 2);
  DiscreteMeasure out = translated_copies(rho, rho, 7, dirs);
  CHECK(out.size() == rho.size());
  CHECK(out.mass() == rho.mass());
}

TEST_CASE("translated copies validates preconditions") {
  DiscreteMeasure rho = weighted_pair(0.36, 0.24);
  DiscreteMeasure too_big({{0, 0, 0}}, {0.9});
  const std::vector<Vec3> dirs = default_directions(rho, 2);
  CHECK_THROWS_AS(translated_copies(rho, too_big, 5, dirs), Error);
  const std::vector<Vec3> zero_dir = {{0, 0, 0}};
  CHECK_THROWS_AS(translated_copies(rho, rho, 5, zero_dir), Error);
}
