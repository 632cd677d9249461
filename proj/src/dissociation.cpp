#include "scedft/dissociation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scedft/errors.hpp"
#include "scedft/partial.hpp"
#include "scedft/rng.hpp"

namespace scedft {

void MassAllocation::validate(int n_electrons) const {
  double sum = 0.0;
  int above_half = 0;
  for (double a : alphas) {
    if (a < -tol::mass || a > 1.0 + tol::mass) {
      throw invalid_argument_error("MassAllocation: alpha outside [0, 1]");
    }
    sum += a;
    if (a > 0.5 + tol::mass) ++above_half;
  }
  if (sum > 1.0 + tol::mass) throw invalid_argument_error("MassAllocation: total above 1");
  if (n_electrons == 2 && above_half > 1) {
    throw invalid_argument_error("MassAllocation: at most one alpha may exceed 1/2 when N = 2");
  }
}

double gamma_value(const MassAllocation& allocation, std::span<const GbTable> tables) {
  if (allocation.alphas.size() != tables.size()) {
    throw invalid_argument_error("gamma_value: one table per nucleus required");
  }
  if (!tables.empty()) {
    const int N = tables.front().n_electrons;
    const double b = tables.front().b;
    for (const GbTable& t : tables) {
      if (t.n_electrons != N || t.b != b) {
        throw invalid_argument_error("gamma_value: tables disagree on (b, N)");
      }
    }
    allocation.validate(N);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    acc += tables[k].interpolate(allocation.alphas[k]);
  }
  return acc;
}

AllocationResult optimal_allocation(std::span<const GbTable> tables) {
  if (tables.empty()) throw invalid_argument_error("optimal_allocation: no tables");
  for (const GbTable& t : tables) {
    t.validate();  // refuses tables with convexity violations
    if (t.alphas.front() != 0.0 || t.alphas.back() < 1.0 - 1e-12) {
      throw invalid_argument_error("optimal_allocation: tables must cover [0, 1]");
    }
  }
  AllocationResult res;
  res.allocation.alphas.assign(tables.size(), 0.0);
  if (tables.size() == 1) {
    // Single nucleus: the nonincreasing g_b makes the full electron optimal.
    res.allocation.alphas[0] = 1.0;
    res.value = tables[0].interpolate(1.0);
    return res;
  }

  struct Segment {
    double slope;
    std::size_t table, index;
    double capacity;
  };
  std::vector<Segment> segments;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const GbTable& t = tables[k];
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double cap = t.alphas[i + 1] - t.alphas[i];
      segments.push_back({(t.values[i + 1] - t.values[i]) / cap, k, i, cap});
    }
  }
  std::sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    if (a.table != b.table) return a.table < b.table;
    return a.index < b.index;
  });

  // Convexity makes the greedy fill exact: cheaper marginal mass first.
  double remaining = 1.0;
  for (const Segment& seg : segments) {
    if (remaining <= 0.0) break;
    const double take = std::min(seg.capacity, remaining);
    res.allocation.alphas[seg.table] += take;
    remaining -= take;
  }
  for (double& a : res.allocation.alphas) a = std::min(a, 1.0);
  res.value = gamma_value(res.allocation, tables);
  return res;
}

H2Report h2_study(double b, std::span<const GbTable> tables, double separation) {
  if (tables.size() != 2) throw invalid_argument_error("h2_study: need two tables");
  for (const GbTable& t : tables) {
    if (t.Z != 1.0 || t.n_electrons != 2 || t.b != b) {
      throw invalid_argument_error("h2_study: tables must be (Z=1, N=2) at the given b");
    }
  }
  H2Report rep;
  const AllocationResult opt = optimal_allocation(tables);
  rep.allocation = opt.allocation;
  rep.g_limit_value = opt.value;
  rep.h2_limit_energy = 4.0 * tables[0].interpolate(0.5);
  rep.hydrogen_reference = 2.0 * (-0.25);
  rep.difference = rep.h2_limit_energy - rep.hydrogen_reference;
  rep.sampled_epsilons = {0.1, 0.05, 0.02, 0.01};
  for (double eps : rep.sampled_epsilons) rep.nn_terms.push_back(2.0 * eps / separation);
  return rep;
}

std::string to_string(CriterionStatus s) {
  switch (s) {
    case CriterionStatus::satisfied: return "satisfied";
    case CriterionStatus::violated: return "violated";
    case CriterionStatus::inconclusive: return "inconclusive";
  }
  return "unknown";
}

HeteroReport heteronuclear_study(double Z1, double Z2, double b, std::span<const GbTable> tables) {
  if (!(Z1 > Z2) || !(Z2 > 0.0)) throw invalid_argument_error("heteronuclear_study: need Z1 > Z2 > 0");
  if (tables.size() != 2 || tables[0].Z != Z1 || tables[1].Z != Z2) {
    throw invalid_argument_error("heteronuclear_study: tables must match (Z1, Z2)");
  }
  (void)b;
  HeteroReport rep;
  rep.g_z1_at_1 = tables[0].interpolate(1.0);
  rep.threshold = -(Z1 * Z1 + Z2 * Z2) / 8.0;
  // g values are one-sided (upper bounds); a strict inequality is only
  // reported when it clears the solver margin.
  const double margin = 3.0 * tol::gb_solver;
  if (rep.g_z1_at_1 > rep.threshold + margin) {
    rep.criterion = CriterionStatus::satisfied;
  } else if (rep.g_z1_at_1 < rep.threshold - margin) {
    rep.criterion = CriterionStatus::violated;
  } else {
    rep.criterion = CriterionStatus::inconclusive;
  }
  const AllocationResult opt = optimal_allocation(tables);
  rep.allocation = opt.allocation;
  rep.value = opt.value;
  rep.alpha_star = opt.allocation.alphas[0];
  rep.b0_alpha = 1.0;
  return rep;
}

std::optional<double> gamma_limit_lower_bound(const MassAllocation& allocation, const NucleiConfig& nuclei,
                                              int n_electrons, std::span<const GbTable> tables) {
  if (allocation.alphas.size() != nuclei.size()) {
    throw invalid_argument_error("gamma_limit_lower_bound: allocation/nuclei size mismatch");
  }
  for (double a : allocation.alphas) {
    if (a > 1.0 / n_electrons + 1e-12) return std::nullopt;
  }
  double value = 0.0;
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    value += -allocation.alphas[k] * nuclei.charges[k] * nuclei.charges[k] / 4.0;
  }
  if (!tables.empty()) {
    const double gv = gamma_value(allocation, tables);
    if (std::abs(gv - value) > tol::convexity) {
      throw invariant_violation_error("gamma_limit_lower_bound: closed form disagrees with gamma_value");
    }
  }
  return value;
}

namespace {

// Per-unit-scale fractional slice cost of a single hydrogenic component of
// mass beta with slice mass 2 beta - 1; tabulated once over beta in (1/2, 1].
double within_site_fractional(double beta) {
  if (beta <= 0.5) return 0.0;
  static const std::vector<double> table = [] {
    constexpr int n = 161;
    std::vector<double> t(n, 0.0);
    const GbShape unit{{1.0}, {1.0}};
    GbSearchConfig cfg;
    for (int i = 1; i < n; ++i) {
      const double beta_i = 0.5 + 0.5 * static_cast<double>(i) / (n - 1);
      t[i] = fractional_cost_shape(unit, beta_i, 2.0 * beta_i - 1.0, cfg);
    }
    return t;
  }();
  const double pos = (beta - 0.5) / 0.5 * (table.size() - 1);
  const int k = std::min(static_cast<int>(pos), static_cast<int>(table.size()) - 2);
  const double t = pos - k;
  return (1.0 - t) * table[k] + t * table[k + 1];
}

// Fast correlation of a superposition of site components (N = 2): per-site
// fractional slice for any site holding more than half the mass, plus the
// optimal inter-site transport at center distances.
double correlation_fast(const std::vector<Vec3>& sites, const std::vector<double>& betas,
                        const std::vector<double>& lambdas) {
  double within = 0.0;
  std::vector<double> out(betas.size(), 0.0);
  double out_total = 0.0;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const double excess = std::max(0.0, 2.0 * betas[k] - 1.0);
    if (excess > 0.0) {
      within += lambdas[k] * within_site_fractional(betas[k]);
    }
    out[k] = betas[k] - excess;
    out_total += out[k];
  }
  if (out_total < 1e-14) return within;
  const DiscreteMeasure site_measure(sites, out);
  const MmotResult cross = mmot_exact(site_measure, 2);
  return within + cross.cost;
}

DiscreteMeasure shell_surrogate(const NucleiConfig& nuclei, const std::vector<Vec3>& sites,
                                const std::vector<double>& betas, const std::vector<double>& lambdas,
                                int shells_per_site) {
  (void)nuclei;
  std::vector<Vec3> pts;
  std::vector<double> w;
  const GbShape unit{{1.0}, {1.0}};
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (betas[k] < 1e-9) continue;
    DiscreteMeasure comp = discretize_shape_antipodal(unit, betas[k], shells_per_site);
    for (std::size_t i = 0; i < comp.size(); ++i) {
      pts.push_back(sites[k] + (1.0 / lambdas[k]) * comp.point(i));
      w.push_back(comp.weight(i));
    }
  }
  return {std::move(pts), std::move(w)};
}

}  // namespace

std::vector<GepsRecord> minimize_geps_direct(const NucleiConfig& nuclei, double b,
                                             std::span<const double> epsilons,
                                             const DirectSearchConfig& config) {
  if (!(b > 0.0)) throw invalid_argument_error("minimize_geps_direct: b must be positive (use minimize_noninteracting for b = 0)");
  std::vector<GepsRecord> records;
  double nn_sum = 0.0;
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    for (std::size_t l = k + 1; l < nuclei.size(); ++l) {
      nn_sum += nuclei.charges[k] * nuclei.charges[l] / distance(nuclei.positions[k], nuclei.positions[l]);
    }
  }

  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    const double eps = epsilons[e];
    DirectSearchConfig cfg = config;
    cfg.seed = Rng::derive(config.seed, e + 1);
    const DirectMinResult r = minimize_mixture(nuclei, eps, b, correlation_fast, cfg);

    GepsRecord rec;
    rec.epsilon = eps;
    rec.value = r.value;
    rec.nn_term = 2.0 * eps * nn_sum;
    rec.physical_value = r.value + rec.nn_term / 2.0;
    rec.site_masses = r.site_masses;
    rec.escaped_mass = r.escaped_mass;
    rec.stagnation = r.stagnation;
    rec.correlation_fast = r.correlation;
    for (const MixtureComponent& c : r.components) {
      if (c.site >= 0) rec.site_scales.push_back(c.scale);
    }

    // Cross-check against the discrete LP on shell surrogates.
    std::vector<Vec3> sites = nuclei.positions;
    std::vector<double> betas = r.site_masses, lambdas = rec.site_scales;
    for (const MixtureComponent& c : r.components) {
      if (c.site < 0 && c.weight > 1e-9) {
        // Escape component rarely carries mass; include it when it does.
        sites.push_back({0, 0, config.escape_distance_factor * 100.0});
        betas.push_back(c.weight);
        lambdas.push_back(c.scale);
      }
    }
    const DiscreteMeasure surrogate = shell_surrogate(nuclei, sites, betas, lambdas, 6);
    if (surrogate.mass() > 0.5) {
      rec.correlation_lp = mmot_exact(surrogate, 2).cost;
      rec.crosscheck_gap =
          std::abs(rec.correlation_fast - rec.correlation_lp) / std::max(std::abs(rec.correlation_lp), 1e-6);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

StaylocalReport staylocal_check(const DiscreteMeasure& clusters, std::span<const Vec3> centers, double delta) {
  if (centers.empty()) throw invalid_argument_error("staylocal_check: no cluster centers");
  if (!(delta > 0.0)) throw invalid_argument_error("staylocal_check: delta must be positive");
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b_ = a + 1; b_ < centers.size(); ++b_) {
      if (distance(centers[a], centers[b_]) < 4.0 * delta) {
        throw configuration_rejected_error("staylocal_check: centers closer than 4 delta");
      }
    }
  }
  std::vector<int> owner(clusters.size(), -1);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (distance(clusters.point(i), centers[k]) <= delta) {
        owner[i] = static_cast<int>(k);
        break;
      }
    }
    if (owner[i] < 0) {
      throw configuration_rejected_error("staylocal_check: point outside every cluster ball");
    }
  }

  const MmotResult res = mmot_exact(clusters, 2);
  if (!std::isfinite(res.cost)) {
    throw invariant_violation_error("staylocal_check: no finite-cost plan exists");
  }
  StaylocalReport rep;
  rep.plan_cost = res.cost;
  rep.clusters.assign(centers.size(), {});
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    rep.clusters[owner[i]].alpha += clusters.weight(i);
  }
  for (const auto& [t, mass] : res.plan.entries) {
    if (owner[t[0]] == owner[t[1]]) rep.clusters[owner[t[0]]].within_mass += mass;
  }
  for (ClusterStat& c : rep.clusters) {
    c.expected = std::max(0.0, 2.0 * c.alpha - 1.0);
    if (std::abs(c.within_mass - c.expected) > tol::marginal) {
      throw invariant_violation_error("staylocal_check: within-cluster mass " + std::to_string(c.within_mass) +
                                      " differs from the dichotomy value " + std::to_string(c.expected));
    }
  }
  return rep;
}

}  // namespace scedft
