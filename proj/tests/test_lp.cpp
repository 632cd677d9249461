#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scedft/common.hpp"
#include "scedft/lp.hpp"
#include "scedft/rng.hpp"

using namespace scedft;

namespace {

// Transportation problem min sum c_ij x_ij, row sums = a, col sums = b.
lp::Problem transportation(const std::vector<std::vector<double>>& c, const std::vector<double>& a,
                           const std::vector<double>& b) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  lp::ProblemBuilder builder(na + nb);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      builder.add_column(c[i][j], kInf, {{i, 1.0}, {na + j, 1.0}});
    }
  }
  std::vector<double> rhs = a;
  rhs.insert(rhs.end(), b.begin(), b.end());
  builder.set_rhs(rhs);
  return builder.take();
}

}  // namespace

TEST_CASE("tiny equality LP") {
  // min x0 + 2 x1, x0 + x1 = 1 -> x = (1, 0)
  lp::ProblemBuilder b(1);
  b.add_column(1.0, kInf, {{0, 1.0}});
  b.add_column(2.0, kInf, {{0, 1.0}});
  b.set_rhs({1.0});
  auto sol = lp::solve(b.take());
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
}

TEST_CASE("upper bounds force spill") {
  // min x0 + 3 x1, x0 + x1 = 1, x0 <= 0.25 -> x = (0.25, 0.75)
  lp::ProblemBuilder b(1);
  b.add_column(1.0, 0.25, {{0, 1.0}});
  b.add_column(3.0, kInf, {{0, 1.0}});
  b.set_rhs({1.0});
  auto sol = lp::solve(b.take());
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(0.25 + 2.25));
  CHECK(sol.x[0] == doctest::Approx(0.25));
  CHECK(sol.x[1] == doctest::Approx(0.75));
}

TEST_CASE("infeasible detected") {
  // x0 = 1 and x0 = 2 cannot both hold
  lp::ProblemBuilder b(2);
  b.add_column(1.0, kInf, {{0, 1.0}, {1, 1.0}});
  b.set_rhs({1.0, 2.0});
  auto sol = lp::solve(b.take());
  CHECK(sol.status == lp::Status::infeasible);
}

TEST_CASE("unbounded detected") {
  // min -x0 with x0 - x1 = 0, both free upward
  lp::ProblemBuilder b(1);
  b.add_column(-1.0, kInf, {{0, 1.0}});
  b.add_column(0.0, kInf, {{0, -1.0}});
  b.set_rhs({0.0});
  auto sol = lp::solve(b.take());
  CHECK(sol.status == lp::Status::unbounded);
}

TEST_CASE("redundant rows handled") {
  // Duplicated constraint row; still solvable.
  lp::ProblemBuilder b(2);
  b.add_column(1.0, kInf, {{0, 1.0}, {1, 1.0}});
  b.add_column(2.0, kInf, {{0, 1.0}, {1, 1.0}});
  b.set_rhs({1.0, 1.0});
  auto sol = lp::solve(b.take());
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("transportation against assignment brute force") {
  // Uniform marginals: optimal value equals the best permutation average
  // (Birkhoff), which brute force enumerates exactly.
  Rng rng(42);
  for (int trial = 0; trial < 12; ++trial) {
    const int s = 3 + static_cast<int>(rng.uniform_index(3));  // 3..5
    std::vector<std::vector<double>> c(s, std::vector<double>(s));
    for (auto& row : c) {
      for (double& v : row) v = rng.uniform(0.1, 5.0);
    }
    std::vector<double> marg(s, 1.0 / s);
    auto sol = lp::solve(transportation(c, marg, marg));
    REQUIRE(sol.status == lp::Status::optimal);

    std::vector<int> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    double best = kInf;
    do {
      double v = 0.0;
      for (int i = 0; i < s; ++i) v += c[i][perm[i]] / s;
      best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("degenerate transportation") {
  // Heavily tied costs and degenerate vertices.
  std::vector<std::vector<double>> c = {{1, 1, 1}, {1, 1, 1}, {1, 1, 2}};
  std::vector<double> a = {0.5, 0.25, 0.25};
  auto sol = lp::solve(transportation(c, a, a));
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("determinism") {
  Rng rng(5);
  const int s = 4;
  std::vector<std::vector<double>> c(s, std::vector<double>(s));
  for (auto& row : c) {
    for (double& v : row) v = rng.uniform(0.0, 1.0);
  }
  std::vector<double> marg(s, 0.25);
  auto s1 = lp::solve(transportation(c, marg, marg));
  auto s2 = lp::solve(transportation(c, marg, marg));
  REQUIRE(s1.status == lp::Status::optimal);
  CHECK(s1.objective == s2.objective);
  CHECK(s1.x == s2.x);
  CHECK(s1.iterations == s2.iterations);
}
