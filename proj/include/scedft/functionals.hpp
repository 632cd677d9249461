#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "scedft/measures.hpp"

namespace scedft {

// T(rho) = int |grad sqrt(rho)|^2 = int 4 pi r^2 (u')^2 dr with
// u = sqrt(m / (4 pi r^2)); second-order differences, trapezoid quadrature,
// u extrapolated quadratically to r = 0.
double kinetic(const RadialDensity& rho);

// int m(r)/max(r, R) dr: the spherical-average (Newton) identity for the
// Coulomb potential of a radial density seen from distance R.
double potential_single(const RadialDensity& rho, double R);

// U(rho) = sum_k Z_k int d rho / |x - X_k|.
double potential(const RadialDensity& rho, const NucleiConfig& nuclei);
double potential(const DiscreteMeasure& rho, const NucleiConfig& nuclei);

struct EnergyParams {
  double epsilon = 1.0;
  double b = 0.0;
  int n_electrons = 2;

  void validate() const;
};

struct EnergyReport {
  double kinetic = 0.0;
  double correlation = 0.0;
  double potential = 0.0;
  double f_eps = 0.0;
  double g_eps = 0.0;
};

// F_eps = eps T + b C - U with the correlation value supplied by the caller
// (mmot or partial solver of their choice); G_eps = eps F_eps.
EnergyReport f_eps(const RadialDensity& rho, const NucleiConfig& nuclei, const EnergyParams& params,
                   double correlation_value);

struct RescaleCheck {
  double lhs = 0.0;  // G_eps(rho) assembled from eps^2 T + eps b C - eps U
  double rhs = 0.0;  // T(rho^eps) + b C(rho^eps) - U_{X/eps}(rho^eps)
  double rel_error = 0.0;
};

// Verifies G_eps(rho) = T(rho^eps) + b C(rho^eps) - sum Z_k U_{X_k/eps}
// (rho^eps); both sides evaluated independently, the correlation term with
// the radial co-motion solver on each side. Throws beyond rel_tol.
RescaleCheck rescale_identity_check(const RadialDensity& rho, const NucleiConfig& nuclei,
                                    const EnergyParams& params, double rel_tol = 0.01);

struct HydrogenSolution {
  double energy = 0.0;  // -Z^2/4
  RadialDensity density;
};

// Ground state of T - Z U_0: energy -Z^2/4, density Z^3 e^{-Z r} / (8 pi).
HydrogenSolution hydrogen_exact(double Z, double r_max = grid::default_r_max, int intervals = grid::default_J);

// Unit-scale hydrogenic profile evaluated once on the default grid through
// the kinetic/potential machinery; mixtures use the exact homothety scaling
// T -> lambda^2 T, U(R) -> u(lambda R).
class HydrogenicKernel {
 public:
  static const HydrogenicKernel& instance();

  double kinetic_unit() const { return T_unit_; }
  double onsite_potential_unit() const { return U0_unit_; }
  // int m_unit(x)/max(x, t) dx for a nucleus at scaled distance t.
  double potential_at(double t) const;

 private:
  HydrogenicKernel();
  double T_unit_ = 0.0;
  double U0_unit_ = 0.0;
  std::vector<double> x_, m_;
};

struct MixtureComponent {
  int site = 0;  // index into the nuclei config; -1 = far escape site
  double weight = 0.0;
  double scale = 1.0;  // hydrogenic decay rate lambda
};

struct DirectSearchConfig {
  int restarts = 20;
  std::uint64_t seed = 42;
  int nm_max_iter = 2500;
  double escape_distance_factor = 50.0;  // escape site distance per unit diameter
};

struct DirectMinResult {
  double value = 0.0;
  std::vector<MixtureComponent> components;
  std::vector<double> site_masses;  // mass at each nucleus
  std::vector<double> site_spreads; // rms radius of each component
  double escaped_mass = 0.0;
  double correlation = 0.0;  // correlation value at the optimum (0 when b = 0)
  bool stagnation = false;
};

// Correlation evaluator hook for the interacting case: receives the site
// positions (escape site last), per-site masses and scales, and returns the
// correlation cost of the superposition.
using CorrelationFn = std::function<double(const std::vector<Vec3>& sites, const std::vector<double>& betas,
                                           const std::vector<double>& lambdas)>;

// Direct search over per-nucleus hydrogenic profiles with free mixture
// weights and scales (plus one far escape component); minimizes
// eps^2 T + eps b C - eps U. Restarts derive seeds from config.seed and run
// in parallel deterministically.
DirectMinResult minimize_mixture(const NucleiConfig& nuclei, double eps, double b,
                                 const CorrelationFn& correlation, const DirectSearchConfig& config);

// Non-interacting case b = 0 (the correlation hook is unused).
DirectMinResult minimize_noninteracting(const NucleiConfig& nuclei, double eps,
                                        const DirectSearchConfig& config = {});

// Realizes one mixture component as a RadialDensity on its own grid.
RadialDensity mixture_component_density(const MixtureComponent& c, int intervals = 1600);

}  // namespace scedft
