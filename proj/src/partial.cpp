#include "scedft/partial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scedft/lp.hpp"

namespace scedft {

PartialResult partial_cost_full(const DiscreteMeasure& rho, double m, int n_marginals) {
  if (n_marginals < 2) throw invalid_argument_error("partial_cost: need N >= 2");
  if (m < -tol::mass || m > rho.mass() + tol::mass) {
    throw invalid_argument_error("partial_cost: m = " + std::to_string(m) + " outside [0, mass]");
  }
  const int s = static_cast<int>(rho.size());
  PartialResult res;
  res.plan.n_marginals = n_marginals;
  res.mu.assign(s, 0.0);
  if (m <= 0.0) return res;  // mu = 0 with the empty plan

  double size_check = 1.0;
  for (int i = 0; i < n_marginals; ++i) size_check *= s;
  if (size_check > static_cast<double>(tol::lp_size_cap)) {
    throw size_exceeded_error("partial_cost: s^N exceeds lp_size_cap");
  }

  const detail::TupleSpace space(s, n_marginals);
  const std::vector<double> cost = detail::cost_tensor(rho, space, kInf);

  // Rows: 0 .. N*s-1 marginal-vs-mu coupling (pi_i^# P - mu = 0), then one
  // mass row sum(mu) = m. Columns: mu_j (bounded by rho_j), then the
  // coincidence-free tuples.
  const int mass_row = n_marginals * s;
  lp::ProblemBuilder builder(mass_row + 1);
  for (int j = 0; j < s; ++j) {
    std::vector<std::pair<int, double>> ent;
    for (int i = 0; i < n_marginals; ++i) ent.emplace_back(i * s + j, -1.0);
    ent.emplace_back(mass_row, 1.0);
    builder.add_column(0.0, rho.weight(j), ent);
  }
  std::vector<std::size_t> col_tuple;
  std::vector<int> t;
  for (std::size_t flat = 0; flat < space.size(); ++flat) {
    if (std::isinf(cost[flat])) continue;
    space.decode(flat, t);
    std::vector<std::pair<int, double>> ent;
    for (int i = 0; i < n_marginals; ++i) ent.emplace_back(i * s + t[i], 1.0);
    builder.add_column(cost[flat], kInf, ent);
    col_tuple.push_back(flat);
  }
  std::vector<double> rhs(mass_row + 1, 0.0);
  rhs[mass_row] = m;
  builder.set_rhs(std::move(rhs));

  const lp::Solution sol = lp::solve(builder.take());
  if (sol.status == lp::Status::infeasible) {
    res.cost = kInf;
    return res;
  }
  if (sol.status != lp::Status::optimal) {
    throw iteration_limit_error("partial_cost: LP did not reach optimality");
  }
  res.cost = sol.objective;
  for (int j = 0; j < s; ++j) res.mu[j] = sol.x[j];
  for (std::size_t c = 0; c < col_tuple.size(); ++c) {
    if (sol.x[s + c] > 1e-14) {
      space.decode(col_tuple[c], t);
      res.plan.entries.emplace(t, sol.x[s + c]);
    }
  }
  return res;
}

double partial_cost(const DiscreteMeasure& rho, double m, int n_marginals) {
  return partial_cost_full(rho, m, n_marginals).cost;
}

double relaxed_envelope_n2(const DiscreteMeasure& rho) {
  if (rho.mass() > 1.0 + tol::mass) throw invalid_argument_error("relaxed_envelope_n2: mass above 1");
  const double m = std::max(0.0, 2.0 * rho.mass() - 1.0);
  if (m == 0.0) return 0.0;
  return partial_cost(rho, std::min(m, rho.mass()), 2);
}

double relaxed_envelope_upper(const DiscreteMeasure& rho, int n_marginals) {
  if (n_marginals < 2) throw invalid_argument_error("relaxed_envelope_upper: need N >= 2");
  if (rho.mass() > 1.0 + tol::mass) throw invalid_argument_error("relaxed_envelope_upper: mass above 1");
  const double n = static_cast<double>(n_marginals);
  const double m = n / (n - 1.0) * std::max(0.0, rho.mass() - 1.0 / n);
  if (m == 0.0) return 0.0;
  return partial_cost(rho, std::min(m, rho.mass()), n_marginals);
}

DiscreteMeasure translated_copies(const DiscreteMeasure& rho, const DiscreteMeasure& mu, int n,
                                  std::span<const Vec3> directions) {
  if (n < 1) throw invalid_argument_error("translated_copies: n must be >= 1");
  for (std::size_t a = 0; a < directions.size(); ++a) {
    if (!(norm(directions[a]) > 0.0)) throw invalid_argument_error("translated_copies: zero direction");
    for (std::size_t b = a + 1; b < directions.size(); ++b) {
      if (distance(directions[a], directions[b]) == 0.0) {
        throw invalid_argument_error("translated_copies: directions must be pairwise distinct");
      }
    }
  }

  // nu = rho - mu on the common support (mu <= rho componentwise).
  std::vector<double> nu_w(rho.size(), 0.0);
  double nu_mass = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    long match = -1;
    for (std::size_t k = 0; k < rho.size(); ++k) {
      if (distance(rho.point(k), mu.point(i)) < tol::merge) {
        match = static_cast<long>(k);
        break;
      }
    }
    if (match < 0 || mu.weight(i) > rho.weight(match) + tol::mass) {
      throw invalid_argument_error("translated_copies: mu is not dominated by rho");
    }
  }
  for (std::size_t k = 0; k < rho.size(); ++k) {
    double mu_k = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (distance(rho.point(k), mu.point(i)) < tol::merge) mu_k = mu.weight(i);
    }
    nu_w[k] = std::max(0.0, rho.weight(k) - mu_k);
    nu_mass += nu_w[k];
  }
  const double total = rho.mass() + static_cast<double>(directions.size()) * nu_mass;
  if (total > 1.0 + tol::mass) {
    throw invalid_argument_error("translated_copies: mass(rho) + (N-1) mass(rho - mu) exceeds 1");
  }

  std::vector<Vec3> pts = rho.points();
  std::vector<double> w = rho.weights();
  for (const Vec3& xi : directions) {
    const Vec3 shift = static_cast<double>(n) * xi;
    for (std::size_t k = 0; k < rho.size(); ++k) {
      if (nu_w[k] > 0.0) {
        pts.push_back(rho.point(k) + shift);
        w.push_back(nu_w[k]);
      }
    }
  }
  return {std::move(pts), std::move(w)};
}

std::vector<Vec3> default_directions(const DiscreteMeasure& rho, int n_marginals) {
  double diam = 0.0;
  for (std::size_t a = 0; a < rho.size(); ++a) {
    for (std::size_t b = a + 1; b < rho.size(); ++b) {
      diam = std::max(diam, distance(rho.point(a), rho.point(b)));
    }
  }
  const double scale = diam + 1.0;
  std::vector<Vec3> dirs;
  for (int k = 0; k < n_marginals - 1; ++k) {
    Vec3 e{0, 0, 0};
    e[k % 3] = scale * (1.0 + static_cast<double>(k / 3));
    dirs.push_back(e);
  }
  return dirs;
}

}  // namespace scedft
