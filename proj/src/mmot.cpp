#include "scedft/mmot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scedft/lp.hpp"
#include "scedft/parallel.hpp"

namespace scedft {

namespace detail {

TupleSpace::TupleSpace(int support, int marginals) : s(support), n(marginals) {
  stride.resize(n);
  std::size_t acc = 1;
  for (int i = 0; i < n; ++i) {
    stride[i] = acc;
    acc *= static_cast<std::size_t>(s);
  }
  total = acc;
}

void TupleSpace::decode(std::size_t flat, std::vector<int>& out) const {
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<int>((flat / stride[i]) % static_cast<std::size_t>(s));
  }
}

std::vector<double> cost_tensor(const DiscreteMeasure& rho, const TupleSpace& space, double cap) {
  const int s = space.s;
  std::vector<double> pair(static_cast<std::size_t>(s) * s, 0.0);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      if (a == b) {
        pair[static_cast<std::size_t>(a) * s + b] = kInf;
        continue;
      }
      const double d = distance(rho.point(a), rho.point(b));
      pair[static_cast<std::size_t>(a) * s + b] = d < tol::coincidence ? kInf : 1.0 / d;
    }
  }
  std::vector<double> cost(space.size());
  par::parallel_for(space.size(), [&](std::size_t flat) {
    thread_local std::vector<int> t;
    space.decode(flat, t);
    double acc = 0.0;
    for (int i = 0; i < space.n && acc < kInf; ++i) {
      for (int j = i + 1; j < space.n; ++j) {
        acc += pair[static_cast<std::size_t>(t[i]) * s + t[j]];
      }
    }
    cost[flat] = std::isinf(acc) && std::isfinite(cap) ? cap : acc;
  });
  return cost;
}

void sinkhorn_slice_logsumexp(const TupleSpace& space, const std::vector<double>& cost,
                              const std::vector<std::vector<double>>& f, int i, double reg,
                              std::vector<double>& out) {
  const int s = space.s;
  const int n = space.n;
  const std::size_t others = space.size() / static_cast<std::size_t>(s);
  out.assign(s, -kInf);
  par::parallel_for(static_cast<std::size_t>(s), [&](std::size_t j) {
    double max_arg = -kInf;
    // Two passes over the slice t_i = j: max, then the shifted sum.
    for (int pass = 0; pass < 2; ++pass) {
      double sum = 0.0;
      for (std::size_t o = 0; o < others; ++o) {
        std::size_t rem = o;
        std::size_t flat = j * space.stride[i];
        double fsum = 0.0;
        for (int l = 0; l < n; ++l) {
          if (l == i) continue;
          const int tl = static_cast<int>(rem % static_cast<std::size_t>(s));
          rem /= static_cast<std::size_t>(s);
          flat += static_cast<std::size_t>(tl) * space.stride[l];
          fsum += f[l][tl];
        }
        const double arg = (fsum - cost[flat]) / reg;
        if (pass == 0) {
          max_arg = std::max(max_arg, arg);
        } else {
          sum += std::exp(arg - max_arg);
        }
      }
      if (pass == 1) {
        out[j] = std::isinf(max_arg) ? -kInf : max_arg + std::log(sum);
      }
    }
  });
}

}  // namespace detail

double TransportPlan::total_mass() const {
  double acc = 0.0;
  for (const auto& [t, w] : entries) acc += w;
  return acc;
}

std::vector<double> TransportPlan::marginal(int i, std::size_t support_size) const {
  std::vector<double> out(support_size, 0.0);
  for (const auto& [t, w] : entries) out[t[i]] += w;
  return out;
}

void TransportPlan::validate_marginals(const DiscreteMeasure& rho) const {
  for (const auto& [t, w] : entries) {
    if (!(w >= 0.0)) throw invariant_violation_error("TransportPlan: negative mass entry");
  }
  for (int i = 0; i < n_marginals; ++i) {
    const std::vector<double> m = marginal(i, rho.size());
    double viol = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) viol += std::abs(m[j] - rho.weight(j));
    if (viol > tol::marginal) {
      throw invariant_violation_error("TransportPlan: marginal " + std::to_string(i) + " violates by " +
                                      std::to_string(viol));
    }
  }
  if (std::abs(total_mass() - rho.mass()) > tol::marginal) {
    throw invariant_violation_error("TransportPlan: total mass mismatch");
  }
}

double coulomb_cost(std::span<const Vec3> tuple) {
  if (tuple.size() < 2) throw invalid_argument_error("coulomb_cost: need at least two points");
  double acc = 0.0;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    for (std::size_t j = i + 1; j < tuple.size(); ++j) {
      const double d = distance(tuple[i], tuple[j]);
      if (d < tol::coincidence) return kInf;
      acc += 1.0 / d;
    }
  }
  return acc;
}

MmotResult mmot_exact(const DiscreteMeasure& rho, int n_marginals) {
  if (n_marginals < 2) throw invalid_argument_error("mmot_exact: need N >= 2");
  if (!(rho.mass() > 0.0)) throw invalid_argument_error("mmot_exact: measure has zero mass");
  const int s = static_cast<int>(rho.size());
  double size_check = 1.0;
  for (int i = 0; i < n_marginals; ++i) size_check *= s;
  if (size_check > static_cast<double>(tol::lp_size_cap)) {
    throw size_exceeded_error("mmot_exact: s^N = " + std::to_string(size_check) + " exceeds lp_size_cap");
  }

  const detail::TupleSpace space(s, n_marginals);
  const std::vector<double> cost = detail::cost_tensor(rho, space, kInf);

  // Columns: coincidence-free tuples; marginal rows i*s + j.
  lp::ProblemBuilder builder(n_marginals * s);
  std::vector<std::size_t> col_tuple;
  std::vector<int> t;
  std::vector<std::pair<int, double>> entries(n_marginals);
  for (std::size_t flat = 0; flat < space.size(); ++flat) {
    if (std::isinf(cost[flat])) continue;
    space.decode(flat, t);
    for (int i = 0; i < n_marginals; ++i) entries[i] = {i * s + t[i], 1.0};
    builder.add_column(cost[flat], kInf, entries);
    col_tuple.push_back(flat);
  }
  std::vector<double> rhs(static_cast<std::size_t>(n_marginals) * s);
  for (int i = 0; i < n_marginals; ++i) {
    for (int j = 0; j < s; ++j) rhs[static_cast<std::size_t>(i) * s + j] = rho.weight(j);
  }
  builder.set_rhs(std::move(rhs));

  const lp::Solution sol = lp::solve(builder.take());
  MmotResult res;
  res.method = MmotMethod::exact_lp;
  res.gap_estimate = 0.0;
  res.plan.n_marginals = n_marginals;
  if (sol.status == lp::Status::infeasible) {
    // Every coupling is forced onto a coincidence, so the cost is +inf.
    res.cost = kInf;
    return res;
  }
  if (sol.status != lp::Status::optimal) {
    throw iteration_limit_error("mmot_exact: LP did not reach optimality");
  }
  res.cost = sol.objective;
  for (std::size_t c = 0; c < col_tuple.size(); ++c) {
    if (sol.x[c] > 1e-14) {
      space.decode(col_tuple[c], t);
      res.plan.entries.emplace(t, sol.x[c]);
    }
  }
  res.plan.validate_marginals(rho);
  return res;
}

MmotResult mmot_entropic(const DiscreteMeasure& rho, int n_marginals, const EntropicOptions& opt) {
  if (n_marginals < 2) throw invalid_argument_error("mmot_entropic: need N >= 2");
  if (!(opt.reg > 0.0)) throw invalid_argument_error("mmot_entropic: reg must be positive");
  if (!(rho.mass() > 0.0)) throw invalid_argument_error("mmot_entropic: measure has zero mass");

  // Active support: zero-weight points cannot carry plan mass.
  std::vector<int> active;
  std::vector<Vec3> pts;
  std::vector<double> w;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (rho.weight(j) > 0.0) {
      active.push_back(static_cast<int>(j));
      pts.push_back(rho.point(j));
      w.push_back(rho.weight(j));
    }
  }
  const DiscreteMeasure sup(pts, w);
  const int s = static_cast<int>(sup.size());
  double size_check = 1.0;
  for (int i = 0; i < n_marginals; ++i) size_check *= s;
  if (size_check > static_cast<double>(tol::lp_size_cap)) {
    throw size_exceeded_error("mmot_entropic: s^N exceeds lp_size_cap");
  }

  double max_pair = 0.0;
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) {
      const double d = distance(sup.point(a), sup.point(b));
      if (d >= tol::coincidence) max_pair = std::max(max_pair, 1.0 / d);
    }
  }
  if (max_pair == 0.0) {
    throw invalid_argument_error("mmot_entropic: no finite-cost pair on the support");
  }
  const double cap = opt.cost_cap > 0.0 ? opt.cost_cap : tol::entropic_cap_factor * max_pair;
  if (cap < max_pair) {
    throw invalid_argument_error("mmot_entropic: cost_cap below the max finite pairwise cost");
  }

  const detail::TupleSpace space(s, n_marginals);
  std::vector<double> cost = detail::cost_tensor(sup, space, kInf);
  std::vector<char> capped(space.size(), 0);
  for (std::size_t k = 0; k < space.size(); ++k) {
    if (std::isinf(cost[k]) || cost[k] > cap) {
      cost[k] = cap;
      capped[k] = 1;
    }
  }

  std::vector<std::vector<double>> f(n_marginals, std::vector<double>(s, 0.0));
  std::vector<double> slice(s), logw(s);
  for (int j = 0; j < s; ++j) logw[j] = std::log(sup.weight(j));

  auto marginal_violation = [&]() {
    double viol = 0.0;
    for (int i = 0; i < n_marginals; ++i) {
      detail::sinkhorn_slice_logsumexp(space, cost, f, i, opt.reg, slice);
      for (int j = 0; j < s; ++j) {
        viol += std::abs(std::exp(f[i][j] / opt.reg + slice[j]) - sup.weight(j));
      }
    }
    return viol;
  };

  int iter = 0;
  bool converged = false;
  for (; iter < opt.max_iter; ++iter) {
    for (int i = 0; i < n_marginals; ++i) {
      detail::sinkhorn_slice_logsumexp(space, cost, f, i, opt.reg, slice);
      for (int j = 0; j < s; ++j) f[i][j] = opt.reg * (logw[j] - slice[j]);
    }
    if (marginal_violation() < tol::marginal) {
      converged = true;
      break;
    }
  }

  MmotResult res;
  res.method = MmotMethod::entropic;
  res.plan.n_marginals = n_marginals;
  double total_cost = 0.0, leaked = 0.0;
  std::vector<int> t;
  for (std::size_t flat = 0; flat < space.size(); ++flat) {
    space.decode(flat, t);
    double fsum = 0.0;
    for (int l = 0; l < n_marginals; ++l) fsum += f[l][t[l]];
    const double p = std::exp((fsum - cost[flat]) / opt.reg);
    if (p <= 0.0) continue;
    total_cost += p * cost[flat];
    if (capped[flat]) leaked += p;
    if (p > 1e-14 * sup.mass()) {
      std::vector<int> orig(t.size());
      for (int l = 0; l < n_marginals; ++l) orig[l] = active[t[l]];
      res.plan.entries.emplace(std::move(orig), p);
    }
  }
  res.cost = total_cost;
  res.gap_estimate = opt.reg * s * n_marginals * std::log(static_cast<double>(std::max(2, s))) + leaked * cap;
  if (!converged) {
    throw SinkhornIterationLimit(
        "mmot_entropic: marginal violation above tolerance after " + std::to_string(iter) + " sweeps",
        std::move(res));
  }
  return res;
}

MmotResult comotion_cost_n2(const RadialDensity& rho) {
  const double m0 = total_mass(rho);
  if (!(m0 > 0.0)) throw singular_density_error("comotion_cost_n2: zero-mass density");
  const std::vector<double>& r = rho.radii();
  std::vector<double> F = rho.cumulative_mass();
  if (!(F.back() > 0.0)) throw singular_density_error("comotion_cost_n2: degenerate cumulative mass");
  for (double& v : F) v /= F.back();  // normalized CDF, F.back() == 1 exactly

  // Monotone piecewise-linear inverse of F. Flat runs resolve to the
  // leftmost preimage, which keeps the map deterministic.
  auto inverse_cdf = [&](double q) {
    if (q <= 0.0) return r.front();
    if (q >= 1.0) return r.back();
    const auto it = std::lower_bound(F.begin(), F.end(), q);
    const std::size_t j = static_cast<std::size_t>(it - F.begin());
    if (j == 0) return r.front();
    const double dF = F[j] - F[j - 1];
    if (dF <= 0.0) return r[j - 1];
    return r[j - 1] + (r[j] - r[j - 1]) * (q - F[j - 1]) / dF;
  };

  // cost = m0 * int m_norm(r) / (r + a(r)) dr, a(r) = F^{-1}(1 - F(r)).
  std::vector<double> integrand(r.size(), 0.0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double m_norm = rho.mass_density()[j] / m0;
    if (m_norm == 0.0) continue;
    const double a = inverse_cdf(1.0 - F[j]);
    const double sep = r[j] + a;
    if (sep <= 0.0) throw singular_density_error("comotion_cost_n2: all mass at r = 0");
    integrand[j] = m_norm / sep;
  }
  double cost = 0.0;
  for (std::size_t j = 1; j < r.size(); ++j) {
    cost += 0.5 * (r[j] - r[j - 1]) * (integrand[j] + integrand[j - 1]);
  }

  MmotResult res;
  res.method = MmotMethod::comotion;
  res.cost = m0 * cost;
  res.plan.n_marginals = 2;
  return res;
}

DiscreteMeasure discretize_radial_antipodal(const RadialDensity& rho, int n_shells, const Vec3& axis) {
  if (n_shells < 1) throw invalid_argument_error("discretize_radial_antipodal: need at least one shell");
  const double m0 = total_mass(rho);
  if (!(m0 > 0.0)) throw singular_density_error("discretize_radial_antipodal: zero-mass density");
  const double an = norm(axis);
  if (!(an > 0.0)) throw invalid_argument_error("discretize_radial_antipodal: zero axis");
  const Vec3 u = (1.0 / an) * axis;

  const std::vector<double>& r = rho.radii();
  const std::vector<double> F = rho.cumulative_mass();
  std::vector<Vec3> pts;
  std::vector<double> w;
  std::size_t lo = 0;
  for (int k = 0; k < n_shells; ++k) {
    const double q_hi = m0 * static_cast<double>(k + 1) / n_shells;
    std::size_t hi = lo;
    while (hi + 1 < r.size() && F[hi] < q_hi) ++hi;
    // Mass centroid of the bin [lo, hi] (trapezoid-weighted).
    double mass = 0.0, centroid = 0.0;
    for (std::size_t j = lo + 1; j <= hi; ++j) {
      const double dm = 0.5 * (r[j] - r[j - 1]) * (rho.mass_density()[j] + rho.mass_density()[j - 1]);
      mass += dm;
      centroid += dm * 0.5 * (r[j] + r[j - 1]);
    }
    if (mass > 0.0) {
      const double rc = centroid / mass;
      pts.push_back(rho.center() + rc * u);
      w.push_back(0.5 * mass);
      pts.push_back(rho.center() + (-rc) * u);
      w.push_back(0.5 * mass);
    }
    lo = hi;
  }
  return {std::move(pts), std::move(w)};
}

BoundsReport check_bounds(const DiscreteMeasure& rho, int n_marginals, double cost) {
  if (!(rho.mass() > 0.0)) throw invalid_argument_error("check_bounds: zero-mass measure");
  const double nn1 = static_cast<double>(n_marginals) * (n_marginals - 1);
  const double var = variance(rho);
  BoundsReport rep;
  rep.cost = cost;
  rep.lower = var > 0.0 ? nn1 * rho.mass() * rho.mass() / (4.0 * std::sqrt(var)) : kInf;
  const double self = self_interaction(rho);
  rep.upper = std::isinf(self) ? kInf : nn1 / (2.0 * rho.mass()) * self;
  const bool lower_ok = std::isinf(rep.lower) ? std::isinf(cost) : cost >= rep.lower - tol::marginal;
  const bool upper_ok = std::isinf(rep.upper) || cost <= rep.upper + tol::marginal;
  rep.satisfied = lower_ok && upper_ok;
  if (!rep.satisfied) {
    throw invariant_violation_error("check_bounds: sandwich violated (lower " + std::to_string(rep.lower) +
                                    ", cost " + std::to_string(cost) + ", upper " + std::to_string(rep.upper) +
                                    ")");
  }
  return rep;
}

}  // namespace scedft
