#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scedft/errors.hpp"
#include "scedft/functionals.hpp"
#include "scedft/measures.hpp"
#include "scedft/rng.hpp"

using namespace scedft;

TEST_CASE("hydrogen kinetic and potential on the grid") {
  const HydrogenSolution h = hydrogen_exact(1.0);
  CHECK(h.energy == -0.25);
  CHECK(total_mass(h.density) == doctest::Approx(1.0).epsilon(1e-6));
  const double T = kinetic(h.density);
  const double U = potential_single(h.density, 0.0);
  CHECK(T == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(U == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(T - U == doctest::Approx(-0.25).epsilon(4e-3));
}

TEST_CASE("hydrogen scaling in Z") {
  const HydrogenSolution h2 = hydrogen_exact(2.0);
  CHECK(h2.energy == -1.0);
  const NucleiConfig nuc({{0, 0, 0}}, {2.0});
  const double val = kinetic(h2.density) - potential(h2.density, nuc);
  CHECK(val == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("kinetic and potential scaling laws") {
  const RadialDensity rho = hydrogen_exact(1.0, 40.0, 4000).density;
  const double T = kinetic(rho);
  const double U = potential_single(rho, 0.0);
  for (double s : {0.5, 2.0, 4.0}) {
    // keep the support inside the grid when stretching (s < 1 doubles it)
    const RadialDensity scaled = scale_measure(rho, s);
    if (total_mass(scaled) < 0.999) continue;
    CHECK(kinetic(scaled) / T == doctest::Approx(s * s).epsilon(5e-3));
    CHECK(potential_single(scaled, 0.0) / U == doctest::Approx(s).epsilon(5e-3));
  }
}

TEST_CASE("potential far field is the monopole") {
  const RadialDensity rho = hydrogen_exact(1.0).density;
  const double R = 300.0;
  CHECK(potential_single(rho, R) == doctest::Approx(total_mass(rho) / R).epsilon(0.01));
}

TEST_CASE("potential against Monte Carlo for an off-center nucleus") {
  // Newton's spherical-average identity: validated once by direct sampling.
  const RadialDensity rho = hydrogen_exact(1.0, 40.0, 2000).density;
  const double R = 1.7;
  const double exact = potential_single(rho, R);

  Rng rng(2024);
  const std::vector<double>& r = rho.radii();
  const std::vector<double> F = rho.cumulative_mass();
  const double mass = F.back();
  double acc = 0.0;
  const int samples = 400000;
  for (int i = 0; i < samples; ++i) {
    // radius by inverse CDF sampling, direction uniform on the sphere
    const double q = rng.uniform() * mass;
    const auto it = std::lower_bound(F.begin(), F.end(), q);
    const std::size_t j = std::max<std::size_t>(1, static_cast<std::size_t>(it - F.begin()));
    const double t = (q - F[j - 1]) / std::max(1e-300, F[j] - F[j - 1]);
    const double rad = r[j - 1] + t * (r[j] - r[j - 1]);
    const double mu = rng.uniform(-1.0, 1.0);
    const double d = std::sqrt(rad * rad + R * R - 2.0 * rad * R * mu);
    acc += 1.0 / std::max(d, 1e-12);
  }
  const double mc = mass * acc / samples;
  CHECK(exact == doctest::Approx(mc).epsilon(1e-3));
}

TEST_CASE("discrete potential and singularities") {
  NucleiConfig nuc({{0, 0, 0}, {2, 0, 0}}, {1.0, 2.0});
  DiscreteMeasure rho({{1, 0, 0}}, {1.0});
  CHECK(potential(rho, nuc) == doctest::Approx(1.0 + 2.0));
  DiscreteMeasure at_nucleus({{0, 0, 0}}, {0.5});
  CHECK(std::isinf(potential(at_nucleus, nuc)));
}

TEST_CASE("f_eps report identity") {
  const RadialDensity rho = hydrogen_exact(1.0).density;
  const NucleiConfig nuc({{0, 0, 0}}, {1.0});
  EnergyParams params;
  params.epsilon = 0.7;
  params.b = 0.5;
  params.n_electrons = 2;
  const EnergyReport rep = f_eps(rho, nuc, params, 0.3);
  CHECK(rep.g_eps == doctest::Approx(params.epsilon * rep.f_eps).epsilon(1e-12));
  CHECK(rep.kinetic >= 0.0);
  CHECK(rep.potential >= 0.0);
  params.epsilon = 0.0;
  CHECK_THROWS_AS(f_eps(rho, nuc, params, 0.0), Error);
}

TEST_CASE("rescale identity") {
  const RadialDensity rho = hydrogen_exact(1.0).density;
  // eps = 1 is the identity
  {
    EnergyParams p;
    p.epsilon = 1.0;
    const RescaleCheck chk = rescale_identity_check(rho, NucleiConfig({{0, 0, 0}}, {1.0}), p);
    CHECK(chk.rel_error < 1e-10);
  }
  // eps = 0.5 single nucleus, b = 0
  {
    EnergyParams p;
    p.epsilon = 0.5;
    const RescaleCheck chk = rescale_identity_check(rho, NucleiConfig({{0, 0, 0}}, {1.0}), p);
    CHECK(chk.rel_error < 0.01);
  }
  // eps = 0.25 with two nuclei and the correlation term included
  {
    EnergyParams p;
    p.epsilon = 0.25;
    p.b = .5;
    const RescaleCheck chk =
        rescale_identity_check(rho, NucleiConfig({{0, 0, 0}, {3, 0, 0}}, {1.0, 2.0}), p);
    CHECK(chk.rel_error < 0.01);
  }
}

TEST_CASE("noninteracting single nucleus at eps = 1") {
  const NucleiConfig nuc({{0, 0, 0}}, {1.0});
  DirectSearchConfig cfg;
  cfg.restarts = 8;
  const DirectMinResult res = minimize_noninteracting(nuc, 1.0, cfg);
  CHECK(res.value == doctest::Approx(-0.25).epsilon(1e-3));
  CHECK(res.site_masses[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(res.escaped_mass < 1e-3);
}

TEST_CASE("noninteracting concentrates on the highest charge") {
  const NucleiConfig nuc({{0, 0, 0}, {2, 0, 0}}, {1.0, 2.0});
  DirectSearchConfig cfg;
  cfg.restarts = 10;
  const DirectMinResult res = minimize_noninteracting(nuc, 0.01, cfg);
  CHECK(res.value == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(res.site_masses[1] >= 0.99);
  // the optimal component shrinks at scale ~ Z/eps
  CHECK(res.components[1].scale > 50.0);
}

TEST_CASE("noninteracting degenerate charges reach -Z^2/4 regardless of split") {
  const NucleiConfig nuc({{0, 0, 0}, {2, 0, 0}}, {1.0, 1.0});
  DirectSearchConfig cfg;
  cfg.restarts = 8;
  const DirectMinResult res = minimize_noninteracting(nuc, 0.01, cfg);
  CHECK(res.value == doctest::Approx(-0.25).epsilon(0.01));
  CHECK(res.site_masses[0] + res.site_masses[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("epsilon floor enforced") {
  const NucleiConfig nuc({{0, 0, 0}}, {1.0});
  CHECK_THROWS_AS(minimize_noninteracting(nuc, 1e-4), Error);
}
