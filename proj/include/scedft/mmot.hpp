#pragma once

#include <map>
#include <span>
#include <vector>

#include "scedft/common.hpp"
#include "scedft/constants.hpp"
#include "scedft/errors.hpp"
#include "scedft/measures.hpp"

namespace scedft {

// Sparse N-marginal coupling on support-index tuples.
struct TransportPlan {
  int n_marginals = 0;
  std::map<std::vector<int>, double> entries;

  double total_mass() const;
  // Pushforward of the plan under the i-th projection, as point weights.
  std::vector<double> marginal(int i, std::size_t support_size) const;
  // Checks every marginal against the measure within tol::marginal.
  void validate_marginals(const DiscreteMeasure& rho) const;
};

enum class MmotMethod { exact_lp, entropic, comotion };

struct MmotResult {
  double cost = 0.0;
  TransportPlan plan;
  MmotMethod method = MmotMethod::exact_lp;
  double gap_estimate = 0.0;
};

// Coulomb correlation cost sum_{i<j} 1/|x_i - x_j|; +inf on coincidences.
double coulomb_cost(std::span<const Vec3> tuple);

// Exact multi-marginal optimal transport with Coulomb cost: LP over
// coincidence-free tuples with all N marginals equal to rho. Subprobabilities
// run with marginal rho directly (1-homogeneous extension). Returns cost
// +inf when no coincidence-free coupling exists.
MmotResult mmot_exact(const DiscreteMeasure& rho, int n_marginals);

struct EntropicOptions {
  double reg = 1e-3;
  double cost_cap = 0.0;  // <= 0: tol::entropic_cap_factor * max finite pair cost
  int max_iter = tol::sinkhorn_max_iter;
};

// Multi-marginal Sinkhorn on the capped cost tensor, log-domain scaling.
// Terminates when the summed marginal L1 violation drops below
// tol::marginal; otherwise throws SinkhornIterationLimit carrying the last
// iterate.
MmotResult mmot_entropic(const DiscreteMeasure& rho, int n_marginals, const EntropicOptions& opt = {});

class SinkhornIterationLimit : public Error {
 public:
  SinkhornIterationLimit(const std::string& what, MmotResult last)
      : Error(ErrorKind::iteration_limit, what), last_iterate(std::move(last)) {}
  MmotResult last_iterate;
};

// N = 2 radial shortcut: co-motion radius a(r) with F(a(r)) = 1 - F(r),
// second particle diametrically opposite, cost = m * int m_norm/(r + a) dr.
// The optimality of this map is a validated conjecture; callers on
// acceptance paths cross-check against mmot_exact on a coarse
// discretization.
MmotResult comotion_cost_n2(const RadialDensity& rho);

// Equal-mass antipodal shell discretization of a radial density: n_shells
// CDF bins, each bin's mass split over +/- (mass centroid radius) * axis.
DiscreteMeasure discretize_radial_antipodal(const RadialDensity& rho, int n_shells, const Vec3& axis = {0, 0, 1});

struct BoundsReport {
  double lower = 0.0;
  double upper = 0.0;
  double cost = 0.0;
  bool satisfied = false;
};

// Two-sided sandwich N(N-1)||rho||^2 / (4 sqrt(Var)) <= cost <=
// N(N-1)/(2||rho||) * self_interaction(rho). Throws on violation beyond
// 1e-8; the upper bound is +inf (vacuous) for atomic measures.
BoundsReport check_bounds(const DiscreteMeasure& rho, int n_marginals, double cost);

namespace detail {

// Flat tuple codec over s^N, coordinate i has stride s^i.
struct TupleSpace {
  int s = 0;
  int n = 0;
  std::vector<std::size_t> stride;

  TupleSpace(int support, int marginals);
  std::size_t size() const { return total; }
  std::size_t total = 0;
  void decode(std::size_t flat, std::vector<int>& out) const;
};

// Capped Coulomb cost tensor over all tuples; coincident pairs count as
// `cap` when cap is finite, +inf otherwise.
std::vector<double> cost_tensor(const DiscreteMeasure& rho, const TupleSpace& space, double cap);

// One Sinkhorn marginal update for coordinate i: writes the logsumexp of
// (sum_{l != i} f_l(t_l) - cost_t)/reg over each slice t_i = j into out[j].
// Parallel over j; bitwise identical to the serial reference by
// construction (each slot is an independent serial reduction).
void sinkhorn_slice_logsumexp(const TupleSpace& space, const std::vector<double>& cost,
                              const std::vector<std::vector<double>>& f, int i, double reg,
                              std::vector<double>& out);

}  // namespace detail

}  // namespace scedft
