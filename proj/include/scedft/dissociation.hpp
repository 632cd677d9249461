#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scedft/functionals.hpp"
#include "scedft/gb.hpp"
#include "scedft/measures.hpp"
#include "scedft/mmot.hpp"

namespace scedft {

// Electron-mass allocation over the nuclei in the dissociation limit.
struct MassAllocation {
  std::vector<double> alphas;

  // Throws unless every alpha is in [0,1], the sum is <= 1 + tol, and (for
  // N = 2) at most one entry exceeds 1/2.
  void validate(int n_electrons) const;
};

// Limit energy G(rho) = sum_k g_b(Z_k, alpha_k), piecewise-linear
// interpolation inside each table. Depends only on the allocation: diffuse
// mass never enters.
double gamma_value(const MassAllocation& allocation, std::span<const GbTable> tables);

// Simplex-constrained minimization of sum_k g_b(Z_k, alpha_k) over
// {alpha >= 0, sum = 1}: exact greedy water-filling over the sorted
// piecewise-linear slopes (valid by convexity of each table).
struct AllocationResult {
  MassAllocation allocation;
  double value = 0.0;
};
AllocationResult optimal_allocation(std::span<const GbTable> tables);

struct H2Report {
  MassAllocation allocation;
  double g_limit_value = 0.0;        // min G = 2 g_b(1, 1/2)
  double h2_limit_energy = 0.0;      // 4 g_b(1, 1/2), the molecular energy limit
  double hydrogen_reference = 0.0;   // twice the hydrogen ground energy
  double difference = 0.0;
  std::vector<double> sampled_epsilons;
  std::vector<double> nn_terms;      // 2 eps / |X1 - X2| at each sampled eps
};
H2Report h2_study(double b, std::span<const GbTable> tables, double separation = 2.0);

enum class CriterionStatus { satisfied, violated, inconclusive };
std::string to_string(CriterionStatus s);

struct HeteroReport {
  double g_z1_at_1 = 0.0;        // solver upper bound for g_b(Z1, 1)
  double threshold = 0.0;        // -(Z1^2 + Z2^2)/8
  CriterionStatus criterion = CriterionStatus::inconclusive;
  MassAllocation allocation;     // argmin of the tabulated problem
  double value = 0.0;
  double alpha_star = 0.0;       // allocation on the Z1 nucleus
  double b0_alpha = 1.0;         // non-interacting prediction
};
HeteroReport heteronuclear_study(double Z1, double Z2, double b, std::span<const GbTable> tables);

// Closed form -sum alpha_k Z_k^2 / 4 valid when every alpha_k <= 1/N (the
// diffuse concentration <= 1/N is a contract on the input); checks agreement
// with gamma_value when tables are supplied.
std::optional<double> gamma_limit_lower_bound(const MassAllocation& allocation,
                                              const NucleiConfig& nuclei, int n_electrons,
                                              std::span<const GbTable> tables = {});

struct GepsRecord {
  double epsilon = 0.0;
  double value = 0.0;           // min G_eps over the trial family
  double nn_term = 0.0;         // 2 eps sum_{k<l} Z_k Z_l / |X_k - X_l|, reported, never added
  double physical_value = 0.0;  // value + nn_term / 2 (molecular energy per G_eps normalization)
  double correlation_fast = 0.0;
  double correlation_lp = 0.0;       // coarse LP cross-check at the optimum
  double crosscheck_gap = 0.0;       // relative |fast - lp|
  std::vector<double> site_masses;
  std::vector<double> site_scales;
  double escaped_mass = 0.0;
  bool stagnation = false;
};

// Direct minimization of G_eps (N = 2) over per-nucleus hydrogenic
// components with free masses and scales; the correlation term uses the
// fast path (per-site fractional slice + inter-site transport on the
// centers), cross-checked by a discrete LP on shell surrogates at each
// optimum.
std::vector<GepsRecord> minimize_geps_direct(const NucleiConfig& nuclei, double b,
                                             std::span<const double> epsilons,
                                             const DirectSearchConfig& config = {});

struct ClusterStat {
  double alpha = 0.0;
  double within_mass = 0.0;
  double expected = 0.0;
};

struct StaylocalReport {
  std::vector<ClusterStat> clusters;
  double plan_cost = 0.0;
};

// Optimal-plan structure check (N = 2): within-cluster plan mass is 0 for
// alpha_i <= 1/2 and 2 alpha_i - 1 for alpha_i > 1/2, within 1e-8. Requires
// inter-center separation >= 4 delta and every point inside some cluster
// ball; throws invariant_violation if the dichotomy fails.
StaylocalReport staylocal_check(const DiscreteMeasure& clusters, std::span<const Vec3> centers, double delta);

}  // namespace scedft
