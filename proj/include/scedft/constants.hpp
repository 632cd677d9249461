#pragma once

#include <cstddef>

namespace scedft::tol {

// Subprobability slack: total mass above 1 + mass rejects at construction.
inline constexpr double mass = 1e-9;

// Marginal feasibility contract for transport plans (L1 per marginal).
inline constexpr double marginal = 1e-8;

// Tuples with any pairwise distance below this are treated as coincident
// (Coulomb cost +inf) and excluded from LP variable sets.
inline constexpr double coincidence = 1e-12;

// Discrete points closer than this are merged at construction.
inline constexpr double merge = 1e-12;

// Absolute slack for g_b table monotonicity / discrete convexity repair.
inline constexpr double convexity = 5e-3;

// Reported solver tolerance for g_b upper bounds.
inline constexpr double gb_solver = 1e-3;

// Cap on the LP variable count s^N for exact multi-marginal solves.
inline constexpr std::size_t lp_size_cap = 1'000'000;

// Sinkhorn iteration cap.
inline constexpr int sinkhorn_max_iter = 100'000;

// Entropic cost cap factor: cap = factor * max finite pairwise cost.
inline constexpr double entropic_cap_factor = 1e3;

// Below this epsilon, direct minimization of G_eps is refused (grid cannot
// resolve the concentrating density).
inline constexpr double epsilon_floor = 1e-3;

}  // namespace scedft::tol

namespace scedft::grid {

// Default uniform radial grid: J intervals on [0, r_max].
inline constexpr double default_r_max = 40.0;
inline constexpr int default_J = 4000;

}  // namespace scedft::grid
