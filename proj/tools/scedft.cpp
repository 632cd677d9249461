// Batch CLI: runs the named experiments and writes results.json (machine
// readable, byte-stable across reruns with the same config and seed),
// results.csv, and run.log into the output directory.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "scedft/dissociation.hpp"
#include "scedft/errors.hpp"
#include "scedft/functionals.hpp"
#include "scedft/gb.hpp"
#include "scedft/json_io.hpp"
#include "scedft/measures.hpp"
#include "scedft/mmot.hpp"
#include "scedft/parallel.hpp"
#include "scedft/partial.hpp"

namespace fs = std::filesystem;
using namespace scedft;

namespace {

struct RunContext {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 42;
  int threads = 0;
  std::ostringstream log;

  Json load_config() const {
    if (config_path.empty()) return Json::object();
    return Json::parse(read_file(config_path));
  }

  void note(const std::string& line) { log << line << "\n"; }
};

Json tolerances_json() {
  Json j;
  j["tol_mass"] = tol::mass;
  j["tol_marginal"] = tol::marginal;
  j["coincidence_eps"] = tol::coincidence;
  j["conv_tol"] = tol::convexity;
  j["gb_solver_tol"] = tol::gb_solver;
  j["lp_size_cap"] = tol::lp_size_cap;
  return j;
}

void emit(const RunContext& ctx, const Json& config, const Json& results, const std::string& csv) {
  fs::create_directories(ctx.out_dir);
  Json out;
  out["command"] = ctx.command;
  out["seed"] = ctx.seed;
  out["threads_requested"] = ctx.threads;
  out["tolerances"] = tolerances_json();
  out["config"] = config;
  out["results"] = results;
  write_file_atomic((fs::path(ctx.out_dir) / "results.json").string(), out.dump(2) + "\n");
  write_file_atomic((fs::path(ctx.out_dir) / "results.csv").string(), csv);
  write_file_atomic((fs::path(ctx.out_dir) / "run.log").string(), ctx.log.str());
}

std::vector<double> parse_alpha_grid(const Json& config, double step_default = 0.05) {
  if (config.contains("alpha_grid")) return config.at("alpha_grid").get<std::vector<double>>();
  std::vector<double> a;
  const int n = static_cast<int>(std::lround(1.0 / step_default));
  for (int i = 0; i <= n; ++i) a.push_back(step_default * i);
  return a;
}

GbSearchConfig search_config(const RunContext& ctx) {
  GbSearchConfig cfg;
  cfg.seed = ctx.seed;
  return cfg;
}

std::string csv_line(std::initializer_list<double> vals) {
  std::ostringstream s;
  char buf[64];
  bool first = true;
  for (double v : vals) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s << (first ? "" : ",") << buf;
    first = false;
  }
  s << "\n";
  return s.str();
}

// ---- subcommands ----

int run_hydrogen(RunContext& ctx, double Z) {
  const Json config = {{"Z", Z}};
  const HydrogenSolution sol = hydrogen_exact(Z);
  const double T = kinetic(sol.density);
  const double U = potential_single(sol.density, 0.0);

  const NucleiConfig nuc({{0, 0, 0}}, {Z});
  DirectSearchConfig dcfg;
  dcfg.seed = ctx.seed;
  const DirectMinResult minimized = minimize_noninteracting(nuc, 1.0, dcfg);

  Json res;
  res["energy"] = {{"value", sol.energy}, {"method", "analytic"}, {"tolerance", 0.0}};
  res["grid_kinetic"] = {{"value", T}, {"method", "grid_fd"}, {"tolerance", 1e-3}};
  res["grid_potential"] = {{"value", Z * U}, {"method", "grid_trapezoid"}, {"tolerance", 1e-3}};
  res["grid_energy"] = {{"value", T - Z * U}, {"method", "grid"}, {"tolerance", 1e-3}};
  res["minimized_energy"] = {{"value", minimized.value}, {"method", "direct_search"}, {"tolerance", 1e-3}};
  res["density_mass"] = total_mass(sol.density);
  ctx.note("hydrogen: analytic " + std::to_string(sol.energy) + " grid " + std::to_string(T - Z * U) +
           " minimized " + std::to_string(minimized.value));

  std::string csv = "quantity,value\n";
  csv += "energy_analytic," + csv_line({sol.energy});
  csv += "energy_grid," + csv_line({T - Z * U});
  csv += "energy_minimized," + csv_line({minimized.value});
  emit(ctx, config, res, csv);
  const bool ok = std::abs(sol.energy - (T - Z * U)) < 4e-3 && std::abs(sol.energy - minimized.value) < 1e-3;
  return ok ? 0 : 2;
}

int run_mmot(RunContext& ctx) {
  const Json config = ctx.load_config();
  const DiscreteMeasure rho = discrete_from_json(config.at("measure"));
  const int N = config.value("N", 2);
  const std::string method = config.value("method", "exact");

  MmotResult r;
  if (method == "exact") {
    r = mmot_exact(rho, N);
  } else if (method == "entropic") {
    EntropicOptions opt;
    opt.reg = config.value("reg", 1e-3);
    opt.cost_cap = config.value("cost_cap", 0.0);
    r = mmot_entropic(rho, N, opt);
  } else {
    throw config_error("mmot: unknown method '" + method + "' (expected exact|entropic)");
  }

  Json res;
  res["cost"] = {{"value", r.cost},
                 {"method", r.method == MmotMethod::exact_lp ? "exact_lp" : "entropic"},
                 {"gap_estimate", r.gap_estimate}};
  if (std::isfinite(r.cost) && rho.mass() > 0.0) {
    const BoundsReport b = check_bounds(rho, N, r.cost);
    res["bounds"] = {{"lower", b.lower}, {"upper", b.upper}, {"satisfied", b.satisfied}};
  }
  res["plan"] = to_json(r.plan);
  ctx.note("mmot: cost " + std::to_string(r.cost));

  std::string csv = "cost,gap_estimate\n" + csv_line({r.cost, r.gap_estimate});
  emit(ctx, config, res, csv);
  return 0;
}

int run_partial(RunContext& ctx) {
  const Json config = ctx.load_config();
  const DiscreteMeasure rho = discrete_from_json(config.at("measure"));
  const double m = config.at("m").get<double>();
  const int N = config.value("N", 2);
  const PartialResult r = partial_cost_full(rho, m, N);

  Json res;
  res["cost"] = {{"value", r.cost}, {"method", "joint_lp"}, {"tolerance", tol::marginal}};
  res["mu"] = r.mu;
  res["plan"] = to_json(r.plan);
  ctx.note("partial: cost " + std::to_string(r.cost));
  emit(ctx, config, res, "cost\n" + csv_line({r.cost}));
  return 0;
}

int run_envelope(RunContext& ctx) {
  const Json config = ctx.load_config();
  const DiscreteMeasure rho = discrete_from_json(config.at("measure"));
  const int N = config.value("N", 2);
  const double env = N == 2 ? relaxed_envelope_n2(rho) : relaxed_envelope_upper(rho, N);

  Json res;
  res["envelope"] = {{"value", env},
                     {"method", "joint_lp"},
                     {"exact", N == 2},
                     {"note", N == 2 ? "exact envelope" : "upper bound only"}};
  std::string csv = "n,cost,excess\n";
  if (config.contains("translated_copies") && N == 2 && std::isfinite(env)) {
    const double m = std::max(0.0, 2.0 * rho.mass() - 1.0);
    const PartialResult pr = partial_cost_full(rho, m, 2);
    const DiscreteMeasure mu(rho.points(), pr.mu);
    const std::vector<Vec3> dirs = default_directions(rho, 2);
    Json seq = Json::array();
    for (int n : config.at("translated_copies").at("n").get<std::vector<int>>()) {
      const DiscreteMeasure rho_n = translated_copies(rho, mu, n, dirs);
      const double c = mmot_exact(rho_n, 2).cost;
      seq.push_back({{"n", n}, {"cost", c}, {"excess", c - env}});
      csv += std::to_string(n) + "," + csv_line({c, c - env});
    }
    res["translated_copies"] = std::move(seq);
  }
  ctx.note("envelope: " + std::to_string(env));
  emit(ctx, config, res, csv);
  return 0;
}

int run_gb_table(RunContext& ctx, double Z, double b, int N) {
  Json config = ctx.load_config();
  if (!config.contains("Z")) config["Z"] = Z;
  if (!config.contains("b")) config["b"] = b;
  if (!config.contains("N")) config["N"] = N;
  const std::vector<double> alphas = parse_alpha_grid(config);
  config["alpha_grid"] = alphas;

  GbSearchConfig cfg = search_config(ctx);
  const std::string cache_dir = (fs::path(ctx.out_dir) / "cache").string();
  const GbTable table = gb_tabulate_cached(config.at("Z").get<double>(), config.at("b").get<double>(),
                                           config.at("N").get<int>(), alphas, cfg, cache_dir);

  Json res;
  res["table"] = to_json(table);
  res["tolerance"] = tol::gb_solver;
  res["note"] = "values are upper bounds except on the analytic branch";
  ctx.note("gb-table: " + std::to_string(table.size()) + " entries");
  emit(ctx, config, res, gb_table_csv(table));
  return 0;
}

int run_dissociate(RunContext& ctx) {
  const Json config = ctx.load_config();
  const NucleiConfig nuclei = nuclei_from_json(config.at("nuclei"));
  const double b = config.value("b", 0.5);
  const int N = config.value("N", 2);
  const std::vector<double> alphas = parse_alpha_grid(config);

  GbSearchConfig cfg = search_config(ctx);
  const std::string cache_dir = (fs::path(ctx.out_dir) / "cache").string();
  std::vector<GbTable> tables;
  for (double Zk : nuclei.charges) {
    tables.push_back(gb_tabulate_cached(Zk, b, N, alphas, cfg, cache_dir));
  }

  const AllocationResult opt = optimal_allocation(tables);
  Json res;
  res["allocation"] = opt.allocation.alphas;
  res["gamma_value"] = {{"value", opt.value}, {"method", "water_filling"}, {"tolerance", tol::convexity}};

  std::string csv = "alpha,gamma_value\n";
  if (nuclei.size() == 2) {
    for (double a : alphas) {
      MassAllocation alloc{{a, 1.0 - a}};
      csv += csv_line({a, gamma_value(alloc, tables)});
    }
  }

  if (config.contains("epsilons") && N == 2) {
    DirectSearchConfig dcfg;
    dcfg.seed = ctx.seed;
    const std::vector<double> eps = config.at("epsilons").get<std::vector<double>>();
    const std::vector<GepsRecord> recs = minimize_geps_direct(nuclei, b, eps, dcfg);
    Json direct = Json::array();
    for (const GepsRecord& r : recs) {
      direct.push_back({{"epsilon", r.epsilon},
                        {"value", r.value},
                        {"nn_term", r.nn_term},
                        {"physical_value", r.physical_value},
                        {"site_masses", r.site_masses},
                        {"escaped_mass", r.escaped_mass},
                        {"correlation_fast", r.correlation_fast},
                        {"correlation_lp", r.correlation_lp},
                        {"crosscheck_gap", r.crosscheck_gap},
                        {"stagnation", r.stagnation}});
    }
    res["direct_minimization"] = std::move(direct);
  }
  ctx.note("dissociate: value " + std::to_string(opt.value));
  emit(ctx, config, res, csv);
  return 0;
}

int run_h2(RunContext& ctx, double b, double separation) {
  Json config = ctx.load_config();
  if (!config.contains("b")) config["b"] = b;
  if (!config.contains("separation")) config["separation"] = separation;
  const std::vector<double> alphas = parse_alpha_grid(config);

  GbSearchConfig cfg = search_config(ctx);
  const std::string cache_dir = (fs::path(ctx.out_dir) / "cache").string();
  std::vector<GbTable> tables = {
      gb_tabulate_cached(1.0, config.at("b").get<double>(), 2, alphas, cfg, cache_dir),
      gb_tabulate_cached(1.0, config.at("b").get<double>(), 2, alphas, cfg, cache_dir),
  };
  const H2Report rep = h2_study(config.at("b").get<double>(), tables, config.at("separation").get<double>());

  Json res;
  res["allocation"] = rep.allocation.alphas;
  res["limit_energy"] = {{"value", rep.h2_limit_energy}, {"method", "analytic_branch"}, {"tolerance", 0.0}};
  res["g_limit_value"] = rep.g_limit_value;
  res["hydrogen_reference"] = rep.hydrogen_reference;
  res["difference"] = rep.difference;
  Json nn = Json::array();
  for (std::size_t i = 0; i < rep.sampled_epsilons.size(); ++i) {
    nn.push_back({{"epsilon", rep.sampled_epsilons[i]}, {"nn_term", rep.nn_terms[i]}});
  }
  res["nn_terms"] = std::move(nn);
  ctx.note("h2: limit " + std::to_string(rep.h2_limit_energy));

  std::string csv = "alpha,gamma_value\n";
  for (double a : alphas) {
    MassAllocation alloc{{a, 1.0 - a}};
    csv += csv_line({a, gamma_value(alloc, tables)});
  }
  emit(ctx, config, res, csv);
  return 0;
}

int run_staylocal(RunContext& ctx) {
  const Json config = ctx.load_config();
  const DiscreteMeasure rho = discrete_from_json(config.at("measure"));
  std::vector<Vec3> centers;
  for (const Json& c : config.at("centers")) {
    centers.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
  }
  const double delta = config.at("delta").get<double>();
  const StaylocalReport rep = staylocal_check(rho, centers, delta);

  Json res;
  Json clusters = Json::array();
  std::string csv = "alpha,within_mass,expected\n";
  for (const ClusterStat& c : rep.clusters) {
    clusters.push_back({{"alpha", c.alpha}, {"within_mass", c.within_mass}, {"expected", c.expected}});
    csv += csv_line({c.alpha, c.within_mass, c.expected});
  }
  res["clusters"] = std::move(clusters);
  res["plan_cost"] = rep.plan_cost;
  res["tolerance"] = tol::marginal;
  ctx.note("staylocal: ok");
  emit(ctx, config, res, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCE-DFT bond dissociation experiments"};
  app.require_subcommand(1);

  RunContext ctx;
  double Z = 1.0, b = 0.5, separation = 2.0;
  int N = 2;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", ctx.config_path, "JSON config path");
    cmd->add_option("--out", ctx.out_dir, "output directory");
    cmd->add_option("--seed", ctx.seed, "master seed for stochastic restarts");
    cmd->add_option("--threads", ctx.threads, "thread count (0 = auto, 1 = serial)");
  };

  CLI::App* hydrogen = app.add_subcommand("hydrogen", "hydrogen ground-state benchmark");
  hydrogen->add_option("--Z", Z, "nuclear charge");
  add_common(hydrogen);
  CLI::App* mmot = app.add_subcommand("mmot", "multi-marginal optimal transport cost");
  add_common(mmot);
  CLI::App* partial = app.add_subcommand("partial", "fractional transport cost");
  add_common(partial);
  CLI::App* envelope = app.add_subcommand("envelope", "weak* relaxed envelope");
  add_common(envelope);
  CLI::App* gbtable = app.add_subcommand("gb-table", "tabulate g_b(Z, alpha)");
  gbtable->add_option("--Z", Z, "nuclear charge");
  gbtable->add_option("--b", b, "correlation strength");
  gbtable->add_option("--N", N, "electron count");
  add_common(gbtable);
  CLI::App* dissociate = app.add_subcommand("dissociate", "dissociation limit study");
  add_common(dissociate);
  CLI::App* h2 = app.add_subcommand("h2", "H2 bond dissociation study");
  h2->add_option("--b", b, "correlation strength");
  h2->add_option("--separation", separation, "nuclear separation");
  add_common(h2);
  CLI::App* staylocal = app.add_subcommand("staylocal", "optimal plan cluster structure check");
  add_common(staylocal);

  CLI11_PARSE(app, argc, argv);
  par::set_threads(ctx.threads);

  try {
    if (app.got_subcommand(hydrogen)) {
      ctx.command = "hydrogen";
      return run_hydrogen(ctx, Z);
    }
    if (app.got_subcommand(mmot)) {
      ctx.command = "mmot";
      return run_mmot(ctx);
    }
    if (app.got_subcommand(partial)) {
      ctx.command = "partial";
      return run_partial(ctx);
    }
    if (app.got_subcommand(envelope)) {
      ctx.command = "envelope";
      return run_envelope(ctx);
    }
    if (app.got_subcommand(gbtable)) {
      ctx.command = "gb-table";
      return run_gb_table(ctx, Z, b, N);
    }
    if (app.got_subcommand(dissociate)) {
      ctx.command = "dissociate";
      return run_dissociate(ctx);
    }
    if (app.got_subcommand(h2)) {
      ctx.command = "h2";
      return run_h2(ctx, b, separation);
    }
    if (app.got_subcommand(staylocal)) {
      ctx.command = "staylocal";
      return run_staylocal(ctx);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::iteration_limit:
        return 3;
      case ErrorKind::invariant_violation:
      case ErrorKind::table_invalid:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
