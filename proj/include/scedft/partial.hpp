#pragma once

#include <span>
#include <vector>

#include "scedft/measures.hpp"
#include "scedft/mmot.hpp"

namespace scedft {

// Fractional transport cost C(rho, m) = min { C(mu) : 0 <= mu <= rho,
// ||mu|| = m }, solved as one joint LP over (mu, P): the mu weights live on
// the support of rho and every marginal of P equals mu.
struct PartialResult {
  double cost = 0.0;
  std::vector<double> mu;  // optimal inner measure, one weight per support point
  TransportPlan plan;
};

PartialResult partial_cost_full(const DiscreteMeasure& rho, double m, int n_marginals);
double partial_cost(const DiscreteMeasure& rho, double m, int n_marginals);

// Weak* lower semicontinuous envelope at N = 2: C(rho, max(0, 2||rho|| - 1)).
double relaxed_envelope_n2(const DiscreteMeasure& rho);

// Upper bound for the envelope at general N (exact for N = 2):
// min { C(mu) : 0 <= mu <= rho, ||mu|| = (N/(N-1)) max(0, ||rho|| - 1/N) }.
double relaxed_envelope_upper(const DiscreteMeasure& rho, int n_marginals);

// Recovery sequence rho_n = rho + sum_k translate(rho - mu, n * xi_k) from
// the envelope upper-bound construction; needs N-1 pairwise distinct nonzero
// directions and mass(rho) + (N-1) mass(rho - mu) <= 1 + tol.
DiscreteMeasure translated_copies(const DiscreteMeasure& rho, const DiscreteMeasure& mu, int n,
                                  std::span<const Vec3> directions);

// Axis-aligned default directions scaled past the support diameter.
std::vector<Vec3> default_directions(const DiscreteMeasure& rho, int n_marginals);

}  // namespace scedft
