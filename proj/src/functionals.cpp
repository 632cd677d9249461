#include "scedft/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scedft/errors.hpp"
#include "scedft/mmot.hpp"
#include "scedft/nelder_mead.hpp"

namespace scedft {

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) acc += 0.5 * (x[j] - x[j - 1]) * (y[j] + y[j - 1]);
  return acc;
}

// Derivative at x of the quadratic through (xa,ya), (xb,yb), (xc,yc).
double quad_deriv(double x, double xa, double ya, double xb, double yb, double xc, double yc) {
  return ya * (2 * x - xb - xc) / ((xa - xb) * (xa - xc)) + yb * (2 * x - xa - xc) / ((xb - xa) * (xb - xc)) +
         yc * (2 * x - xa - xb) / ((xc - xa) * (xc - xb));
}

// Value at x of the quadratic through three nodes (Lagrange).
double quad_value(double x, double xa, double ya, double xb, double yb, double xc, double yc) {
  return ya * (x - xb) * (x - xc) / ((xa - xb) * (xa - xc)) + yb * (x - xa) * (x - xc) / ((xb - xa) * (xb - xc)) +
         yc * (x - xa) * (x - xb) / ((xc - xa) * (xc - xb));
}

}  // namespace

double kinetic(const RadialDensity& rho) {
  const std::vector<double>& r = rho.radii();
  const std::vector<double>& m = rho.mass_density();
  const std::size_t n = r.size();
  if (n < 4) throw invalid_density_error("kinetic: grid too coarse");
  if (!(total_mass(rho) > 0.0)) throw invalid_argument_error("kinetic: zero-mass density");

  std::vector<double> u(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    u[j] = std::sqrt(m[j] / (4.0 * kPi * r[j] * r[j]));
  }
  // m/(4 pi r^2) is 0/0 at the origin; extrapolate u quadratically inward.
  u[0] = quad_value(0.0, r[1], u[1], r[2], u[2], r[3], u[3]);
  if (u[0] < 0.0) u[0] = 0.0;

  std::vector<double> integrand(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t a = j == 0 ? 0 : (j == n - 1 ? n - 3 : j - 1);
    const double du = quad_deriv(r[j], r[a], u[a], r[a + 1], u[a + 1], r[a + 2], u[a + 2]);
    integrand[j] = 4.0 * kPi * r[j] * r[j] * du * du;
  }
  return trapezoid(r, integrand);
}

double potential_single(const RadialDensity& rho, double R) {
  if (!(R >= 0.0)) throw invalid_argument_error("potential_single: negative distance");
  const std::vector<double>& r = rho.radii();
  const std::vector<double>& m = rho.mass_density();
  std::vector<double> integrand(r.size(), 0.0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (m[j] == 0.0) continue;
    const double denom = std::max(r[j], R);
    if (denom == 0.0) return kInf;  // positive mass exactly at a nucleus at the center
    integrand[j] = m[j] / denom;
  }
  return trapezoid(r, integrand);
}

double potential(const RadialDensity& rho, const NucleiConfig& nuclei) {
  double acc = 0.0;
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    acc += nuclei.charges[k] * potential_single(rho, distance(rho.center(), nuclei.positions[k]));
  }
  return acc;
}

double potential(const DiscreteMeasure& rho, const NucleiConfig& nuclei) {
  double acc = 0.0;
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho.weight(i) == 0.0) continue;
      const double d = distance(rho.point(i), nuclei.positions[k]);
      if (d < tol::coincidence) return kInf;
      acc += nuclei.charges[k] * rho.weight(i) / d;
    }
  }
  return acc;
}

void EnergyParams::validate() const {
  if (!(epsilon > 0.0)) throw invalid_argument_error("EnergyParams: epsilon must be positive");
  if (!(b >= 0.0)) throw invalid_argument_error("EnergyParams: b must be nonnegative");
  if (n_electrons < 1) throw invalid_argument_error("EnergyParams: N must be >= 1");
}

EnergyReport f_eps(const RadialDensity& rho, const NucleiConfig& nuclei, const EnergyParams& params,
                   double correlation_value) {
  params.validate();
  EnergyReport rep;
  rep.kinetic = kinetic(rho);
  rep.potential = potential(rho, nuclei);
  rep.correlation = correlation_value;
  rep.f_eps = params.epsilon * rep.kinetic + params.b * rep.correlation - rep.potential;
  rep.g_eps = params.epsilon * rep.f_eps;
  return rep;
}

RescaleCheck rescale_identity_check(const RadialDensity& rho, const NucleiConfig& nuclei,
                                    const EnergyParams& params, double rel_tol) {
  params.validate();
  const double eps = params.epsilon;

  const double T = kinetic(rho);
  const double U = potential(rho, nuclei);
  const double C = params.b > 0.0 ? comotion_cost_n2(rho).cost : 0.0;

  // Exact pushforward of rho under x -> x/eps: stretched grid, m scaled.
  std::vector<double> radii(rho.nodes()), m(rho.nodes());
  for (std::size_t j = 0; j < rho.nodes(); ++j) {
    radii[j] = rho.radii()[j] / eps;
    m[j] = eps * rho.mass_density()[j];
  }
  const RadialDensity rho_eps(std::move(radii), std::move(m), rho.center());

  double U_scaled = 0.0;
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    const double R = distance(rho.center(), nuclei.positions[k]);
    U_scaled += nuclei.charges[k] * potential_single(rho_eps, R / eps);
  }
  const double C_scaled = params.b > 0.0 ? comotion_cost_n2(rho_eps).cost : 0.0;

  RescaleCheck chk;
  chk.lhs = eps * eps * T + eps * params.b * C - eps * U;
  chk.rhs = kinetic(rho_eps) + params.b * C_scaled - U_scaled;
  chk.rel_error = std::abs(chk.lhs - chk.rhs) / std::max(1.0, std::abs(chk.lhs));
  if (chk.rel_error > rel_tol) {
    throw invariant_violation_error("rescale_identity_check: mismatch " + std::to_string(chk.rel_error));
  }
  return chk;
}

HydrogenSolution hydrogen_exact(double Z, double r_max, int intervals) {
  if (!(Z > 0.0)) throw invalid_argument_error("hydrogen_exact: Z must be positive");
  HydrogenSolution sol;
  sol.energy = -Z * Z / 4.0;
  sol.density = RadialDensity::from_density(
      [Z](double r) { return Z * Z * Z * std::exp(-Z * r) / (8.0 * kPi); }, r_max, intervals);
  return sol;
}

const HydrogenicKernel& HydrogenicKernel::instance() {
  static const HydrogenicKernel kernel;
  return kernel;
}

HydrogenicKernel::HydrogenicKernel() {
  const HydrogenSolution h = hydrogen_exact(1.0, grid::default_r_max, 2000);
  T_unit_ = kinetic(h.density);
  U0_unit_ = potential_single(h.density, 0.0);
  x_ = h.density.radii();
  m_ = h.density.mass_density();
}

double HydrogenicKernel::potential_at(double t) const {
  if (t <= 0.0) return U0_unit_;
  double acc = 0.0;
  for (std::size_t j = 1; j < x_.size(); ++j) {
    const double fa = m_[j - 1] / std::max(x_[j - 1], t);
    const double fb = m_[j] / std::max(x_[j], t);
    acc += 0.5 * (x_[j] - x_[j - 1]) * (fa + fb);
  }
  return acc;
}

namespace {

struct MixtureLayout {
  std::vector<Vec3> sites;  // nuclei positions, escape site last
  Vec3 escape_site;
  int n_sites = 0;  // nuclei count

  explicit MixtureLayout(const NucleiConfig& nuclei, double escape_factor) {
    n_sites = static_cast<int>(nuclei.size());
    double diam = 1.0;
    Vec3 centroid{0, 0, 0};
    for (const Vec3& p : nuclei.positions) centroid = centroid + (1.0 / n_sites) * p;
    for (int a = 0; a < n_sites; ++a) {
      for (int b = a + 1; b < n_sites; ++b) {
        diam = std::max(diam, distance(nuclei.positions[a], nuclei.positions[b]));
      }
    }
    escape_site = centroid + (escape_factor * diam) * Vec3{0, 0, 1};
    sites = nuclei.positions;
    sites.push_back(escape_site);
  }
};

// params: [logit_1..logit_M, log lambda_1..lambda_M]; the escape logit is
// pinned to 0 and the escape scale fixed.
constexpr double kEscapeScale = 0.5;

void unpack(std::span<const double> params, int n_sites, std::vector<double>& betas,
            std::vector<double>& lambdas) {
  betas.assign(n_sites + 1, 0.0);
  lambdas.assign(n_sites + 1, kEscapeScale);
  double zmax = 0.0;
  for (int k = 0; k < n_sites; ++k) zmax = std::max(zmax, params[k]);
  double denom = std::exp(0.0 - zmax);
  for (int k = 0; k < n_sites; ++k) denom += std::exp(params[k] - zmax);
  for (int k = 0; k < n_sites; ++k) {
    betas[k] = std::exp(params[k] - zmax) / denom;
    lambdas[k] = std::exp(std::clamp(params[n_sites + k], -12.0, 12.0));
  }
  betas[n_sites] = std::exp(0.0 - zmax) / denom;  // escape weight
}

}  // namespace

DirectMinResult minimize_mixture(const NucleiConfig& nuclei, double eps, double b,
                                 const CorrelationFn& correlation, const DirectSearchConfig& config) {
  if (eps < tol::epsilon_floor) {
    throw invalid_argument_error("minimize_mixture: epsilon below the 1e-3 floor");
  }
  if (b > 0.0 && !correlation) {
    throw invalid_argument_error("minimize_mixture: b > 0 requires a correlation evaluator");
  }
  const HydrogenicKernel& kern = HydrogenicKernel::instance();
  const MixtureLayout layout(nuclei, config.escape_distance_factor);
  const int M = layout.n_sites;

  auto energy = [&](std::span<const double> params) {
    std::vector<double> betas, lambdas;
    unpack(params, M, betas, lambdas);
    double value = 0.0;
    for (int k = 0; k <= M; ++k) {
      if (betas[k] <= 0.0) continue;
      const double lam = lambdas[k];
      double attraction = 0.0;
      for (int l = 0; l < M; ++l) {
        const double R = distance(layout.sites[k], nuclei.positions[l]);
        // homothety: U_R(lambda-scaled unit profile) = lambda u(lambda R)
        attraction += nuclei.charges[l] * lam * kern.potential_at(lam * R);
      }
      value += betas[k] * (eps * eps * lam * lam * kern.kinetic_unit() - eps * attraction);
    }
    if (b > 0.0) {
      value += eps * b * correlation(layout.sites, betas, lambdas);
    }
    return value;
  };

  std::vector<double> x0(2 * M);
  for (int k = 0; k < M; ++k) {
    x0[k] = 4.0;  // sites start with nearly all the mass, escape nearly empty
    x0[M + k] = std::log(nuclei.charges[k] / eps);
  }
  MultistartOptions opt;
  opt.restarts = config.restarts;
  opt.seed = config.seed;
  opt.nm.max_iter = config.nm_max_iter;
  opt.sample_halfwidth = 2.0;
  const NmResult nm = multistart_minimize(energy, x0, opt);

  DirectMinResult res;
  std::vector<double> betas, lambdas;
  unpack(nm.x, M, betas, lambdas);
  res.value = nm.f;
  res.stagnation = !nm.converged;
  res.site_masses.assign(M, 0.0);
  res.site_spreads.assign(M, 0.0);
  for (int k = 0; k < M; ++k) {
    res.site_masses[k] = betas[k];
    res.site_spreads[k] = std::sqrt(12.0) / lambdas[k];
    res.components.push_back({k, betas[k], lambdas[k]});
  }
  res.escaped_mass = betas[M];
  res.components.push_back({-1, betas[M], lambdas[M]});
  res.correlation = b > 0.0 ? correlation(layout.sites, betas, lambdas) : 0.0;
  return res;
}

DirectMinResult minimize_noninteracting(const NucleiConfig& nuclei, double eps, const DirectSearchConfig& config) {
  return minimize_mixture(nuclei, eps, 0.0, nullptr, config);
}

RadialDensity mixture_component_density(const MixtureComponent& c, int intervals) {
  const double lam = c.scale;
  const double w = c.weight;
  return RadialDensity::from_density(
      [=](double r) { return w * lam * lam * lam * std::exp(-lam * r) / (8.0 * kPi); },
      grid::default_r_max / lam, intervals);
}

}  // namespace scedft
