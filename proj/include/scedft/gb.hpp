#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scedft/measures.hpp"

namespace scedft {

enum class GbMethod { analytic_small_alpha, solved_n2, solved_ball };

std::string to_string(GbMethod m);

// Tabulated alpha -> g_b(Z, alpha) for fixed (Z, b, N). Values are
// nonincreasing, discretely convex (within tol::convexity), bounded by
// -Z^2 alpha / 4 <= value <= 0, and exactly -Z^2 alpha / 4 for
// alpha <= 1/N.
struct GbTable {
  double Z = 1.0;
  double b = 0.0;
  int n_electrons = 2;
  std::vector<double> alphas;
  std::vector<double> values;
  std::vector<GbMethod> methods;

  void validate() const;  // throws table_invalid on violations
  double interpolate(double alpha) const;  // piecewise linear
  std::size_t size() const { return alphas.size(); }
};

// Closed form -Z^2 alpha / 4, valid for alpha <= 1/N; nullopt otherwise.
std::optional<double> gb_analytic(double Z, double alpha, int n_electrons);

// Radial shape family for the one-nucleus solver: a hydrogenic mixture with
// total mass alpha; the overall homothety is optimized in closed form, so
// only the shape parameters are searched.
struct GbShape {
  std::vector<double> weights;  // sum 1
  std::vector<double> scales;   // decay rates, scale-fixed to scales[0] = 1
};

struct GbSearchConfig {
  int restarts = 12;
  std::uint64_t seed = 42;
  int nm_max_iter = 600;
  int quantile_nodes = 256;
  int slice_quadrature = 64;
  int slice_scan = 16;
  bool lp_crosscheck = false;  // cross-check the fractional term at the optimum
  int crosscheck_shells = 12;
};

struct GbSolveResult {
  double value = 0.0;
  GbShape shape;
  double physical_scale = 1.0;      // homothety applied to the unit shape
  double partial_cost_used = 0.0;   // fractional term at the physical scale
  double lp_crosscheck_gap = 0.0;   // |fast - joint LP| / max(|LP|, 1e-6)
  bool stagnation = false;
  GbMethod method = GbMethod::solved_n2;
};

// N = 2 one-nucleus solver: minimizes T + b C(rho, 2 alpha - 1) - Z U_0 over
// hydrogenic mixtures of mass alpha via the scale-reduced ratio form
// -(Z U_0 - b C)_+^2 / (4 T). alpha <= 1/2 delegates to the closed form.
// The returned value is an upper bound, certified >= -Z^2 alpha / 4.
GbSolveResult gb_solve_n2(double Z, double b, double alpha, const GbSearchConfig& config = {});

// Fractional cost of a hydrogenic mixture of mass alpha: min over CDF slices
// [q, q + m] of the slice co-motion cost (the radial fast path; the joint LP
// is its oracle at coarse resolution).
double fractional_cost_shape(const GbShape& shape, double alpha, double m, const GbSearchConfig& config = {});

// Antipodal equal-mass discretization of a mixture shape (quantile bins).
DiscreteMeasure discretize_shape_antipodal(const GbShape& shape, double alpha, int n_shells,
                                           const Vec3& axis = {0, 0, 1});

// Ball-constrained form: min T + b C - Z U_0 over probabilities on an
// antipodal shell cloud with at most alpha of the mass inside B(0, R);
// alternating local solver (weights step / exact plan step).
struct BallGrid {
  std::vector<double> shell_radii;  // strictly increasing, all > 0
};

BallGrid default_ball_grid(double Z, double R, double alpha, int n_electrons);

struct GbBallResult {
  double value = 0.0;
  std::vector<double> point_weights;
  DiscreteMeasure support;
  int rounds = 0;
};

GbBallResult gb_solve_ball(double Z, double b, double alpha, double R, int n_electrons, const BallGrid& grid,
                           const GbSearchConfig& config = {});

// Fills one entry per alpha with the cheapest valid method, enforcing the
// table invariants post-hoc (repairs below tol::convexity, errors above).
GbTable gb_tabulate(double Z, double b, int n_electrons, const std::vector<double>& alphas,
                    const GbSearchConfig& config = {});

// Disk cache keyed by (Z, b, N, family, seed); returns the cached table when
// present and matching, otherwise computes and stores it.
GbTable gb_tabulate_cached(double Z, double b, int n_electrons, const std::vector<double>& alphas,
                           const GbSearchConfig& config, const std::string& cache_dir);

std::string gb_cache_filename(double Z, double b, int n_electrons, std::uint64_t seed);

}  // namespace scedft
