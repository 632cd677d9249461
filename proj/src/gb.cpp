#include "scedft/gb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "scedft/errors.hpp"
#include "scedft/functionals.hpp"
#include "scedft/json_io.hpp"
#include "scedft/lp.hpp"
#include "scedft/mmot.hpp"
#include "scedft/nelder_mead.hpp"
#include "scedft/parallel.hpp"
#include "scedft/partial.hpp"
#include "scedft/rng.hpp"

namespace scedft {

std::string to_string(GbMethod m) {
  switch (m) {
    case GbMethod::analytic_small_alpha: return "analytic_small_alpha";
    case GbMethod::solved_n2: return "solved_n2";
    case GbMethod::solved_ball: return "solved_ball";
  }
  return "unknown";
}

std::optional<double> gb_analytic(double Z, double alpha, int n_electrons) {
  if (!(Z > 0.0)) throw invalid_argument_error("gb_analytic: Z must be positive");
  if (alpha < 0.0 || alpha > 1.0 + tol::mass) throw invalid_argument_error("gb_analytic: alpha outside [0,1]");
  if (n_electrons < 1) throw invalid_argument_error("gb_analytic: N must be >= 1");
  if (alpha <= 1.0 / n_electrons + 1e-15) return -Z * Z * alpha / 4.0;
  return std::nullopt;
}

namespace {

// CDF of the unit hydrogenic radial profile m(r) = r^2 e^{-r} / 2.
double hydrogenic_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return 1.0 - std::exp(-x) * (1.0 + x + 0.5 * x * x);
}

// Mass CDF of a mixture shape with total mass alpha.
double shape_cdf(const GbShape& shape, double alpha, double r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < shape.weights.size(); ++i) {
    acc += shape.weights[i] * hydrogenic_cdf(shape.scales[i] * r);
  }
  return alpha * acc;
}

// Quantile table r(q) on a uniform q-grid over [0, alpha); the open upper
// end (r -> inf) is clamped one node short, which only shrinks pair
// distances and so keeps the slice cost an upper bound.
std::vector<double> quantile_table(const GbShape& shape, double alpha, int nodes) {
  std::vector<double> r(nodes, 0.0);
  const double lam_min = *std::min_element(shape.scales.begin(), shape.scales.end());
  double lo = 0.0;
  for (int k = 1; k < nodes; ++k) {
    const double q = alpha * static_cast<double>(k) / nodes;
    // Bracket above the previous radius, then bisect.
    double hi = std::max(lo, 1.0 / lam_min);
    while (shape_cdf(shape, alpha, hi) < q) hi *= 2.0;
    double a = lo, b_ = hi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b_);
      if (shape_cdf(shape, alpha, mid) < q) {
        a = mid;
      } else {
        b_ = mid;
      }
    }
    r[k] = 0.5 * (a + b_);
    lo = r[k];
  }
  return r;
}

double interp_quantile(const std::vector<double>& table, double alpha, double q) {
  const int nodes = static_cast<int>(table.size());
  const double pos = q / alpha * nodes;
  if (pos <= 0.0) return table.front();
  if (pos >= nodes - 1) return table.back();
  const int k = static_cast<int>(pos);
  const double t = pos - k;
  return (1.0 - t) * table[k] + t * table[k + 1];
}

// Co-motion cost of the CDF slice [q0, q0 + m]: pairs quantile q0 + u with
// q0 + m - u at diametrically opposite angles.
double slice_cost(const std::vector<double>& table, double alpha, double q0, double m, int quad) {
  if (m <= 0.0) return 0.0;
  double acc = 0.0;
  double prev = 0.0;
  for (int k = 0; k <= quad; ++k) {
    const double u = m * static_cast<double>(k) / quad;
    const double ra = interp_quantile(table, alpha, q0 + u);
    const double rb = interp_quantile(table, alpha, q0 + m - u);
    const double sep = ra + rb;
    const double f = sep > 0.0 ? 1.0 / sep : 0.0;
    if (k > 0) acc += 0.5 * (m / quad) * (f + prev);
    prev = f;
  }
  return acc;
}

struct FractionalEval {
  double cost = 0.0;
  double q0 = 0.0;
};

FractionalEval fractional_min_slice(const std::vector<double>& table, double alpha, double m,
                                    const GbSearchConfig& cfg) {
  FractionalEval best;
  best.cost = kInf;
  const double q_max = alpha - m;
  if (q_max <= 0.0) {
    best.cost = slice_cost(table, alpha, 0.0, m, cfg.slice_quadrature);
    best.q0 = 0.0;
    return best;
  }
  // Coarse scan, then golden-section refinement around the best cell.
  const int scan = std::max(2, cfg.slice_scan);
  int best_k = 0;
  for (int k = 0; k <= scan; ++k) {
    const double q0 = q_max * static_cast<double>(k) / scan;
    const double c = slice_cost(table, alpha, q0, m, cfg.slice_quadrature);
    if (c < best.cost) {
      best = {c, q0};
      best_k = k;
    }
  }
  double a = q_max * std::max(0, best_k - 1) / scan;
  double b_ = q_max * std::min(scan, best_k + 1) / scan;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b_ - gr * (b_ - a), x2 = a + gr * (b_ - a);
  double f1 = slice_cost(table, alpha, x1, m, cfg.slice_quadrature);
  double f2 = slice_cost(table, alpha, x2, m, cfg.slice_quadrature);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      b_ = x2;
      x2 = x1;
      f2 = f1;
      x1 = b_ - gr * (b_ - a);
      f1 = slice_cost(table, alpha, x1, m, cfg.slice_quadrature);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b_ - a);
      f2 = slice_cost(table, alpha, x2, m, cfg.slice_quadrature);
    }
  }
  if (f1 < best.cost) best = {f1, x1};
  if (f2 < best.cost) best = {f2, x2};
  return best;
}

struct ShapeEnergy {
  double U0 = 0.0;      // U_0 of the unit-homothety shape, mass included
  double T = 0.0;       // kinetic of the unit-homothety shape
  double C_frac = 0.0;  // fractional term at unit homothety
  double value = 0.0;   // scale-optimized -(Z U0 - b C)_+^2 / (4 T)
  double scale = 1.0;   // optimal homothety
};

ShapeEnergy shape_energy(const GbShape& shape, double Z, double b, double alpha, const GbSearchConfig& cfg) {
  ShapeEnergy e;
  for (std::size_t i = 0; i < shape.weights.size(); ++i) {
    e.U0 += alpha * shape.weights[i] * shape.scales[i] / 2.0;
    e.T += alpha * shape.weights[i] * shape.scales[i] * shape.scales[i] / 4.0;
  }
  const double m = std::max(0.0, 2.0 * alpha - 1.0);
  if (b > 0.0 && m > 0.0) {
    const std::vector<double> table = quantile_table(shape, alpha, cfg.quantile_nodes);
    e.C_frac = fractional_min_slice(table, alpha, m, cfg).cost;
  }
  const double num = Z * e.U0 - b * e.C_frac;
  if (num <= 0.0 || e.T <= 0.0) {
    e.value = 0.0;
    e.scale = 0.0;
    return e;
  }
  e.value = -num * num / (4.0 * e.T);
  e.scale = num / (2.0 * e.T);
  return e;
}

GbShape unpack_shape(std::span<const double> params) {
  // params: [logit_2, logit_3, log lambda_2, log lambda_3]; component 1 is
  // pinned at logit 0, scale 1 (overall homothety is optimized analytically).
  GbShape s;
  const double l2 = std::clamp(params[0], -30.0, 30.0);
  const double l3 = std::clamp(params[1], -30.0, 30.0);
  const double zmax = std::max({0.0, l2, l3});
  const double d = std::exp(-zmax) + std::exp(l2 - zmax) + std::exp(l3 - zmax);
  s.weights = {std::exp(-zmax) / d, std::exp(l2 - zmax) / d, std::exp(l3 - zmax) / d};
  s.scales = {1.0, std::exp(std::clamp(params[2], -12.0, 6.0)), std::exp(std::clamp(params[3], -12.0, 6.0))};
  return s;
}

}  // namespace

double fractional_cost_shape(const GbShape& shape, double alpha, double m, const GbSearchConfig& config) {
  if (m <= 0.0) return 0.0;
  if (m > alpha + tol::mass) throw invalid_argument_error("fractional_cost_shape: m exceeds the shape mass");
  const std::vector<double> table = quantile_table(shape, alpha, config.quantile_nodes);
  return fractional_min_slice(table, alpha, std::min(m, alpha), config).cost;
}

DiscreteMeasure discretize_shape_antipodal(const GbShape& shape, double alpha, int n_shells, const Vec3& axis) {
  if (n_shells < 1) throw invalid_argument_error("discretize_shape_antipodal: need at least one shell");
  const Vec3 u = (1.0 / norm(axis)) * axis;
  GbSearchConfig cfg;
  const std::vector<double> table = quantile_table(shape, alpha, std::max(cfg.quantile_nodes, 16 * n_shells));
  std::vector<Vec3> pts;
  std::vector<double> w;
  for (int k = 0; k < n_shells; ++k) {
    const double q_mid = alpha * (static_cast<double>(k) + 0.5) / n_shells;
    const double r = interp_quantile(table, alpha, q_mid);
    const double mass = alpha / n_shells;
    pts.push_back(r * u);
    w.push_back(0.5 * mass);
    pts.push_back((-r) * u);
    w.push_back(0.5 * mass);
  }
  return {std::move(pts), std::move(w)};
}

GbSolveResult gb_solve_n2(double Z, double b, double alpha, const GbSearchConfig& config) {
  if (!(Z > 0.0) || !(b >= 0.0)) throw invalid_argument_error("gb_solve_n2: need Z > 0, b >= 0");
  if (!(alpha > 0.0) || alpha > 1.0 + tol::mass) {
    throw invalid_argument_error("gb_solve_n2: alpha must lie in (0, 1]");
  }

  GbSolveResult res;
  if (alpha <= 0.5 + 1e-15) {
    res.value = -Z * Z * alpha / 4.0;
    res.shape = {{1.0}, {1.0}};
    res.physical_scale = Z;  // hydrogen profile at decay rate Z
    res.method = GbMethod::analytic_small_alpha;
    return res;
  }

  auto objective = [&](std::span<const double> params) {
    return shape_energy(unpack_shape(params), Z, b, alpha, config).value;
  };
  const std::vector<double> x0 = {-1.0, -2.0, -4.0, 0.7};
  MultistartOptions opt;
  opt.restarts = config.restarts;
  opt.seed = config.seed;
  opt.nm.max_iter = config.nm_max_iter;
  opt.sample_halfwidth = 2.5;
  const NmResult nm = multistart_minimize(objective, x0, opt);

  const GbShape shape = unpack_shape(nm.x);
  const ShapeEnergy e = shape_energy(shape, Z, b, alpha, config);
  res.value = e.value;
  res.shape = shape;
  res.physical_scale = e.scale;
  res.partial_cost_used = e.scale * e.C_frac;  // C scales linearly under homothety
  res.stagnation = !nm.converged;
  res.method = GbMethod::solved_n2;

  if (res.value < -Z * Z * alpha / 4.0 - 1e-9) {
    throw invariant_violation_error("gb_solve_n2: value below the analytic lower bound");
  }
  if (config.lp_crosscheck && b > 0.0) {
    const double m = 2.0 * alpha - 1.0;
    const DiscreteMeasure surrogate = discretize_shape_antipodal(shape, alpha, config.crosscheck_shells);
    const double lp_val = partial_cost(surrogate, m, 2);
    res.lp_crosscheck_gap = std::abs(e.C_frac - lp_val) / std::max(std::abs(lp_val), 1e-6);
  }
  return res;
}

// ---- ball-constrained solver ----

namespace {

// Piecewise-linear hat deposition of shell masses onto a radial grid.
RadialDensity shells_to_radial(const std::vector<double>& radii, const std::vector<double>& shell_mass) {
  const int K = static_cast<int>(radii.size());
  std::vector<double> nodes;
  nodes.reserve(K + 2);
  nodes.push_back(0.0);
  for (double r : radii) nodes.push_back(r);
  nodes.push_back(radii.back() * 1.25);
  std::vector<double> m(nodes.size(), 0.0);
  for (int i = 0; i < K; ++i) {
    const double left = nodes[i];        // previous node (0 for the first)
    const double right = nodes[i + 2];   // next node (padded top for the last)
    m[i + 1] = 2.0 * shell_mass[i] / (right - left);
  }
  return {std::move(nodes), std::move(m)};
}

// Projection onto {w >= 0, sum w = 1, sum_{j in ball} w <= alpha}.
std::vector<double> project_simplex_ball(std::vector<double> v, const std::vector<char>& in_ball, double alpha) {
  const int n = static_cast<int>(v.size());
  auto simplex_project = [&](double sigma) {
    std::vector<double> shifted(n);
    for (int j = 0; j < n; ++j) shifted[j] = v[j] - (in_ball[j] ? sigma : 0.0);
    std::vector<double> sorted = shifted;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0, tau = 0.0;
    int k = 0;
    for (int i = 0; i < n; ++i) {
      acc += sorted[i];
      const double t = (acc - 1.0) / (i + 1);
      if (sorted[i] - t > 0.0) {
        tau = t;
        k = i + 1;
      }
    }
    (void)k;
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = std::max(0.0, shifted[j] - tau);
    return w;
  };
  std::vector<double> w = simplex_project(0.0);
  double ball_mass = 0.0;
  for (int j = 0; j < n; ++j) {
    if (in_ball[j]) ball_mass += w[j];
  }
  if (ball_mass <= alpha + 1e-12) return w;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double sigma = 0.5 * (lo + hi);
    w = simplex_project(sigma);
    ball_mass = 0.0;
    for (int j = 0; j < n; ++j) {
      if (in_ball[j]) ball_mass += w[j];
    }
    if (ball_mass > alpha) {
      lo = sigma;
    } else {
      hi = sigma;
    }
  }
  return simplex_project(hi);
}

}  // namespace

BallGrid default_ball_grid(double Z, double R, double alpha, int n_electrons) {
  BallGrid g;
  const int inner = n_electrons == 2 ? 10 : 4;
  const int outer = n_electrons == 2 ? 5 : 2;
  const double r_lo = 0.25 / Z, r_hi = 6.0 / Z;
  for (int i = 0; i < inner; ++i) {
    g.shell_radii.push_back(r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (inner - 1)));
  }
  if (alpha < 1.0 - 1e-12) {
    // Room for the escaping 1 - alpha outside the ball.
    const double out_lo = std::max(3.0 * R, 10.0 / Z);
    for (int i = 0; i < outer; ++i) {
      g.shell_radii.push_back(out_lo * std::pow(3.0, static_cast<double>(i) / std::max(1, outer - 1)));
    }
  }
  std::sort(g.shell_radii.begin(), g.shell_radii.end());
  return g;
}

GbBallResult gb_solve_ball(double Z, double b, double alpha, double R, int n_electrons, const BallGrid& grid,
                           const GbSearchConfig& config) {
  (void)config;
  if (!(R > 0.0)) throw invalid_argument_error("gb_solve_ball: R must be positive");
  if (n_electrons < 2) throw invalid_argument_error("gb_solve_ball: need N >= 2");
  const int K = static_cast<int>(grid.shell_radii.size());
  const int s = 2 * K;
  if ((n_electrons == 2 && s > 40) || (n_electrons >= 3 && s > 12)) {
    throw size_exceeded_error("gb_solve_ball: support of " + std::to_string(s) + " points exceeds the cap");
  }
  for (int i = 0; i < K; ++i) {
    if (!(grid.shell_radii[i] > 0.0) || (i > 0 && grid.shell_radii[i] <= grid.shell_radii[i - 1])) {
      throw invalid_argument_error("gb_solve_ball: shell radii must be positive and increasing");
    }
  }
  double outside_capacity = 0.0;
  for (int i = 0; i < K; ++i) {
    if (grid.shell_radii[i] > R) outside_capacity = 1.0;
  }
  if (alpha < 1.0 - 1e-12 && outside_capacity == 0.0) {
    throw invalid_argument_error("gb_solve_ball: grid has no shells outside the ball to hold 1 - alpha");
  }

  // Support points: +/- r_i on the z axis; weights are per point.
  std::vector<Vec3> pts(s);
  std::vector<char> in_ball(s, 0);
  for (int i = 0; i < K; ++i) {
    pts[2 * i] = {0, 0, grid.shell_radii[i]};
    pts[2 * i + 1] = {0, 0, -grid.shell_radii[i]};
    in_ball[2 * i] = in_ball[2 * i + 1] = grid.shell_radii[i] <= R ? 1 : 0;
  }

  auto shell_masses = [&](const std::vector<double>& w) {
    std::vector<double> sm(K, 0.0);
    for (int i = 0; i < K; ++i) sm[i] = w[2 * i] + w[2 * i + 1];
    return sm;
  };
  auto smooth_T = [&](const std::vector<double>& w) {
    // T is 1-homogeneous in the measure, so finite-difference probes that
    // push the total slightly above 1 are evaluated on the normalized
    // profile and rescaled.
    std::vector<double> sm = shell_masses(w);
    double total = 0.0;
    for (double x : sm) total += x;
    if (total <= 0.0) return 0.0;
    for (double& x : sm) x /= total;
    return total * kinetic(shells_to_radial(grid.shell_radii, sm));
  };
  auto U0 = [&](const std::vector<double>& w) {
    double acc = 0.0;
    for (int i = 0; i < K; ++i) acc += (w[2 * i] + w[2 * i + 1]) / grid.shell_radii[i];
    return acc;
  };
  auto true_value = [&](const std::vector<double>& w, double* c_out) {
    const DiscreteMeasure rho(pts, w);
    const double c = mmot_exact(rho, n_electrons).cost;
    if (c_out) *c_out = c;
    return smooth_T(w) + b * c - Z * U0(w);
  };

  // Init: alpha inside (hydrogen-like bins), the rest on the outside shells.
  std::vector<double> w(s, 0.0);
  {
    std::vector<double> raw(K, 0.0);
    double inside_sum = 0.0, outside_count = 0.0;
    for (int i = 0; i < K; ++i) {
      if (in_ball[i * 2]) {
        const double r = grid.shell_radii[i];
        raw[i] = r * r * std::exp(-Z * r);
        inside_sum += raw[i];
      } else {
        outside_count += 1.0;
      }
    }
    const double inside_target = outside_count > 0.0 ? std::min(alpha, 1.0) : 1.0;
    for (int i = 0; i < K; ++i) {
      double sm;
      if (in_ball[2 * i]) {
        sm = inside_sum > 0.0 ? inside_target * raw[i] / inside_sum : 0.0;
      } else {
        sm = (1.0 - inside_target) / outside_count;
      }
      w[2 * i] = w[2 * i + 1] = 0.5 * sm;
    }
    w = project_simplex_ball(w, in_ball, alpha);
  }

  GbBallResult best;
  best.value = true_value(w, nullptr);
  best.point_weights = w;

  const int rounds = 40;
  for (int round = 0; round < rounds; ++round) {
    // Plan step: exact LP at the current weights, then per-unit linearization.
    const DiscreteMeasure rho(pts, w);
    const MmotResult plan = mmot_exact(rho, n_electrons);
    std::vector<double> kappa(s, 0.0);
    if (std::isfinite(plan.cost)) {
      std::vector<double> load(s, 0.0);
      for (const auto& [t, mass] : plan.plan.entries) {
        std::vector<Vec3> tuple(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) tuple[i] = pts[t[i]];
        const double c = coulomb_cost(tuple);
        for (int idx : t) load[idx] += mass * c / n_electrons;
      }
      for (int j = 0; j < s; ++j) {
        if (w[j] > 1e-12) {
          kappa[j] = load[j] / w[j];
        } else {
          // Optimistic insertion cost: the cheapest pair through j.
          double cmin = kInf;
          for (int k = 0; k < s; ++k) {
            if (k == j) continue;
            cmin = std::min(cmin, (n_electrons * (n_electrons - 1) / 2) / distance(pts[j], pts[k]));
          }
          kappa[j] = cmin;
        }
      }
    }

    // Weight step: projected gradient on T + b <kappa, w> - Z U0.
    std::vector<double> grad(s, 0.0);
    const double T0 = smooth_T(w);
    for (int j = 0; j < s; ++j) {
      const double h = 1e-6;
      std::vector<double> wp = w;
      wp[j] += h;
      grad[j] = (smooth_T(wp) - T0) / h + b * kappa[j] - Z / grid.shell_radii[j / 2];
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
    if (gnorm == 0.0) break;

    bool improved = false;
    for (double step : {0.3 / gnorm, 0.1 / gnorm, 0.03 / gnorm, 0.01 / gnorm}) {
      std::vector<double> cand(s);
      for (int j = 0; j < s; ++j) cand[j] = w[j] - step * grad[j];
      cand = project_simplex_ball(cand, in_ball, alpha);
      const double v = true_value(cand, nullptr);
      if (v < best.value - 1e-12) {
        best.value = v;
        best.point_weights = cand;
        w = cand;
        improved = true;
        break;
      }
    }
    best.rounds = round + 1;
    if (!improved) break;
  }

  best.support = DiscreteMeasure(pts, best.point_weights);
  return best;
}

// ---- tabulation ----

void GbTable::validate() const {
  if (alphas.size() != values.size() || alphas.size() != methods.size() || alphas.empty()) {
    throw table_invalid_error("GbTable: inconsistent column lengths");
  }
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!(alphas[i] > alphas[i - 1])) throw table_invalid_error("GbTable: alphas must increase");
  }
  const double num_tol = 1e-6;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (values[i] > num_tol) throw table_invalid_error("GbTable: positive value at index " + std::to_string(i));
    if (values[i] < -Z * Z * alphas[i] / 4.0 - num_tol) {
      throw table_invalid_error("GbTable: value below -Z^2 alpha/4 at index " + std::to_string(i));
    }
    if (alphas[i] <= 1.0 / n_electrons + 1e-15 &&
        std::abs(values[i] + Z * Z * alphas[i] / 4.0) > num_tol) {
      throw table_invalid_error("GbTable: analytic branch mismatch at index " + std::to_string(i));
    }
    if (i > 0 && values[i] > values[i - 1] + tol::convexity) {
      throw table_invalid_error("GbTable: monotonicity violated at index " + std::to_string(i));
    }
    if (i + 1 < alphas.size() && i > 0) {
      if (values[i + 1] + values[i - 1] < 2.0 * values[i] - tol::convexity) {
        throw table_invalid_error("GbTable: discrete convexity violated at index " + std::to_string(i));
      }
    }
  }
}

double GbTable::interpolate(double alpha) const {
  if (alpha < alphas.front() - 1e-12 || alpha > alphas.back() + 1e-12) {
    throw invalid_argument_error("GbTable: alpha outside the tabulated range");
  }
  const auto it = std::upper_bound(alphas.begin(), alphas.end(), alpha);
  if (it == alphas.begin()) return values.front();
  if (it == alphas.end()) return values.back();
  const std::size_t j = static_cast<std::size_t>(it - alphas.begin());
  const double t = (alpha - alphas[j - 1]) / (alphas[j] - alphas[j - 1]);
  return (1.0 - t) * values[j - 1] + t * values[j];
}

GbTable gb_tabulate(double Z, double b, int n_electrons, const std::vector<double>& alphas,
                    const GbSearchConfig& config) {
  if (alphas.empty()) throw invalid_argument_error("gb_tabulate: empty alpha grid");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] < 0.0 || alphas[i] > 1.0 + tol::mass || (i > 0 && alphas[i] <= alphas[i - 1])) {
      throw invalid_argument_error("gb_tabulate: alphas must increase within [0, 1]");
    }
  }
  GbTable table;
  table.Z = Z;
  table.b = b;
  table.n_electrons = n_electrons;
  table.alphas = alphas;
  table.values.assign(alphas.size(), 0.0);
  table.methods.assign(alphas.size(), GbMethod::analytic_small_alpha);

  // Entries are independent; parallel with deterministic per-entry seeds.
  par::parallel_for(alphas.size(), [&](std::size_t i) {
    const double a = alphas[i];
    if (auto v = gb_analytic(Z, a, n_electrons)) {
      table.values[i] = *v;
      table.methods[i] = GbMethod::analytic_small_alpha;
      return;
    }
    GbSearchConfig cfg = config;
    cfg.seed = Rng::derive(config.seed, i);
    if (n_electrons == 2) {
      const GbSolveResult r = gb_solve_n2(Z, b, a, cfg);
      table.values[i] = r.value;
      table.methods[i] = r.method;
    } else {
      // Ball-constrained toy solve at a large radius (sup over R).
      const double R = 16.0 / Z;
      const BallGrid g = default_ball_grid(Z, R, a, n_electrons);
      table.values[i] = gb_solve_ball(Z, b, a, R, n_electrons, g, cfg).value;
      table.methods[i] = GbMethod::solved_ball;
    }
  });

  // Post-hoc repair: lower convex hull along alpha, then a nonincreasing
  // clamp; repairs above tol::convexity are an error, below they absorb
  // solver noise while keeping the upper-bound property of each entry only
  // approximately (the repair moves values down by < conv_tol).
  const std::size_t n = alphas.size();
  std::vector<double> repaired = table.values;
  if (n >= 3) {
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < n; ++i) {
      while (hull.size() >= 2) {
        const std::size_t p = hull[hull.size() - 2], q = hull[hull.size() - 1];
        const double cross = (alphas[q] - alphas[p]) * (table.values[i] - table.values[p]) -
                             (alphas[i] - alphas[p]) * (table.values[q] - table.values[p]);
        if (cross <= 0.0) {
          hull.pop_back();
        } else {
          break;
        }
      }
      hull.push_back(i);
    }
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
      const std::size_t p = hull[h], q = hull[h + 1];
      for (std::size_t i = p; i <= q; ++i) {
        const double t = (alphas[i] - alphas[p]) / (alphas[q] - alphas[p]);
        repaired[i] = (1.0 - t) * table.values[p] + t * table.values[q];
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) repaired[i] = std::min(repaired[i], repaired[i - 1]);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(repaired[i] - table.values[i]) > tol::convexity) {
      throw table_invalid_error("gb_tabulate: invariant violation beyond conv_tol at index " +
                                std::to_string(i));
    }
  }
  table.values = std::move(repaired);
  table.validate();
  return table;
}

std::string gb_cache_filename(double Z, double b, int n_electrons, std::uint64_t seed) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "gb_Z%.6g_b%.6g_N%d_fam3_seed%llu.json", Z, b, n_electrons,
                static_cast<unsigned long long>(seed));
  return buf;
}

GbTable gb_tabulate_cached(double Z, double b, int n_electrons, const std::vector<double>& alphas,
                           const GbSearchConfig& config, const std::string& cache_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(cache_dir);
  const std::string path = (fs::path(cache_dir) / gb_cache_filename(Z, b, n_electrons, config.seed)).string();
  if (fs::exists(path)) {
    try {
      GbTable t = gb_table_from_json(Json::parse(read_file(path)));
      bool match = t.Z == Z && t.b == b && t.n_electrons == n_electrons && t.alphas.size() == alphas.size();
      for (std::size_t i = 0; match && i < alphas.size(); ++i) {
        match = std::abs(t.alphas[i] - alphas[i]) < 1e-12;
      }
      if (match) {
        t.validate();
        return t;
      }
    } catch (const std::exception&) {
      // fall through to recompute on any mismatch or parse failure
    }
  }
  GbTable t = gb_tabulate(Z, b, n_electrons, alphas, config);
  write_file_atomic(path, to_json(t).dump(2) + "\n");
  return t;
}

}  // namespace scedft
