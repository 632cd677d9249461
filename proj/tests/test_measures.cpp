#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scedft/errors.hpp"
#include "scedft/measures.hpp"
#include "scedft/rng.hpp"

using namespace scedft;

namespace {

DiscreteMeasure two_points(double wa, double wb, double d) {
  return DiscreteMeasure({{0, 0, 0}, {d, 0, 0}}, {wa, wb});
}

RadialDensity exp_radial(double lambda = 1.0, double weight = 1.0) {
  // rho(r) = weight * lambda^3 e^{-lambda r} / (8 pi), mass = weight
  return RadialDensity::from_density(
      [=](double r) { return weight * lambda * lambda * lambda * std::exp(-lambda * r) / (8.0 * kPi); }, 40.0,
      4000);
}

}  // namespace

TEST_CASE("total_mass basics") {
  CHECK(total_mass(two_points(0.5, 0.5, 1.0)) == 1.0);
  CHECK(total_mass(DiscreteMeasure{}) == 0.0);
  // radial m(r) = e^{-r}: the analytic integral is 1; the m(0) = 0
  // normalization clips half a cell (5e-3 at this grid)
  RadialDensity d = RadialDensity::uniform_grid(40.0, 4000);
  std::vector<double> m(d.nodes());
  for (std::size_t j = 0; j < d.nodes(); ++j) m[j] = std::exp(-d.radii()[j]);
  RadialDensity e(d.radii(), m);
  CHECK(total_mass(e) == doctest::Approx(1.0).epsilon(6e-3));
  // hydrogen mass density vanishes at the origin, so the analytic-integral
  // oracle applies at full precision there
  CHECK(total_mass(exp_radial()) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("construction invariants") {
  CHECK_THROWS_AS(DiscreteMeasure({{0, 0, 0}}, {-0.1}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({{0, 0, 0}, {1, 0, 0}}, {0.9, 0.2}), Error);
  // duplicates merged
  DiscreteMeasure merged({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}, {0.25, 0.25, 0.5});
  CHECK(merged.size() == 2);
  CHECK(merged.weight(0) == 0.5);
  // radial: m_0 forced to zero, negative densities rejected
  CHECK_THROWS_AS(RadialDensity({0.0, 1.0}, {0.0, -0.5}), Error);
  RadialDensity r({0.0, 1.0, 2.0}, {0.7, 0.1, 0.0});
  CHECK(r.mass_density()[0] == 0.0);
}

TEST_CASE("scale_measure discrete") {
  DiscreteMeasure rho = two_points(0.5, 0.5, 1.0);
  CHECK(distance(scale_measure(rho, 1.0).point(1), rho.point(1)) == 0.0);
  DiscreteMeasure half = scale_measure(rho, 2.0);
  CHECK(distance(half.point(0), half.point(1)) == doctest::Approx(0.5));
  CHECK(half.mass() == rho.mass());
  CHECK_THROWS_AS(scale_measure(rho, 0.0), Error);
}

TEST_CASE("scale_measure radial preserves mass and inverts") {
  RadialDensity rho = exp_radial();
  RadialDensity s2 = scale_measure(rho, 2.0);
  CHECK(total_mass(s2) == doctest::Approx(1.0).epsilon(1e-6));
  RadialDensity back = scale_measure(s2, 0.5);
  double max_dev = 0.0;
  for (std::size_t j = 0; j < rho.nodes(); ++j) {
    max_dev = std::max(max_dev, std::abs(back.mass_density()[j] - rho.mass_density()[j]));
  }
  CHECK(max_dev < 1e-4);  // resampling tolerance
}

TEST_CASE("decompose_atoms") {
  NucleiConfig nuc({{0, 0, 0}, {4, 0, 0}}, {1.0, 1.0});
  DiscreteMeasure rho({{0, 0, 0}, {4, 0, 0}}, {0.4, 0.6});
  auto dec = decompose_atoms(rho, nuc, 0.0);
  REQUIRE(dec.atoms.size() == 2);
  CHECK(dec.atoms[0] == std::pair<std::size_t, double>{0, 0.4});
  CHECK(dec.atoms[1] == std::pair<std::size_t, double>{1, 0.6});
  CHECK(dec.diffuse.empty());

  DiscreteMeasure off({{1, 1, 0}, {2, 2, 0}}, {0.3, 0.3});
  auto dec2 = decompose_atoms(off, nuc, 0.05);
  CHECK(dec2.atoms.empty());
  CHECK(dec2.diffuse.mass() == doctest::Approx(0.6));

  DiscreteMeasure mix({{0, 0, 0}, {9, 9, 9}}, {0.5, 0.5});
  auto dec3 = decompose_atoms(mix, nuc, 0.1);
  REQUIRE(dec3.atoms.size() == 1);
  CHECK(dec3.atoms[0].second == 0.5);
  CHECK(dec3.diffuse.mass() == 0.5);

  // ambiguous: a point within tol of both nuclei
  NucleiConfig close_nuc({{0, 0, 0}, {0.1, 0, 0}}, {1.0, 1.0});
  DiscreteMeasure amb({{0.05, 0, 0}}, {0.2});
  CHECK_THROWS_AS(decompose_atoms(amb, close_nuc, 0.08), Error);
}

TEST_CASE("decompose_atoms conserves mass") {
  Rng rng(7);
  NucleiConfig nuc({{0, 0, 0}, {3, 0, 0}}, {1.0, 2.0});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts;
    std::vector<double> w;
    for (int i = 0; i < 6; ++i) {
      pts.push_back({rng.uniform(-1, 4), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      w.push_back(rng.uniform(0, 0.15));
    }
    DiscreteMeasure rho(pts, w);
    auto dec = decompose_atoms(rho, nuc, 0.5);
    double acc = dec.diffuse.mass();
    for (auto& [k, a] : dec.atoms) acc += a;
    CHECK(acc == doctest::Approx(rho.mass()).epsilon(1e-14));
  }
}

TEST_CASE("variance") {
  DiscreteMeasure dirac({{1, 2, 3}}, {0.7});
  CHECK(variance(dirac) == 0.0);
  DiscreteMeasure pair = two_points(0.5, 0.5, 2.0);
  CHECK(variance(pair) == doctest::Approx(1.0));  // d^2/4 with d = 2
  DiscreteMeasure shifted = pair.translated({5, -3, 1});
  CHECK(variance(shifted) == doctest::Approx(variance(pair)));
  CHECK_THROWS_AS(variance(DiscreteMeasure{}), Error);
}

TEST_CASE("self interaction") {
  DiscreteMeasure pair = two_points(0.5, 0.5, 2.0);
  CHECK(std::isinf(self_interaction(pair)));
  CHECK(std::isinf(self_interaction(DiscreteMeasure({{0, 0, 0}}, {0.1}))));
  CHECK(self_interaction_offdiag(pair) == doctest::Approx(0.25));
}
