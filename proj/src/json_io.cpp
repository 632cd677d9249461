#include "scedft/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scedft/errors.hpp"

namespace scedft {

Json to_json(const DiscreteMeasure& rho) {
  Json j;
  j["type"] = "discrete";
  Json pts = Json::array();
  for (const Vec3& p : rho.points()) pts.push_back({p[0], p[1], p[2]});
  j["points"] = std::move(pts);
  j["weights"] = rho.weights();
  return j;
}

Json to_json(const RadialDensity& rho) {
  const std::vector<double>& r = rho.radii();
  const int J = static_cast<int>(r.size()) - 1;
  const double h = r.back() / J;
  for (int k = 0; k <= J; ++k) {
    if (std::abs(r[k] - k * h) > 1e-9 * std::max(1.0, r.back())) {
      throw invalid_argument_error("to_json(RadialDensity): only uniform grids are serializable");
    }
  }
  Json j;
  j["type"] = "radial";
  j["r_max"] = r.back();
  j["J"] = J;
  j["mass_density"] = rho.mass_density();
  j["center"] = {rho.center()[0], rho.center()[1], rho.center()[2]};
  return j;
}

Json to_json(const NucleiConfig& nuclei) {
  Json j;
  Json pos = Json::array();
  for (const Vec3& p : nuclei.positions) pos.push_back({p[0], p[1], p[2]});
  j["positions"] = std::move(pos);
  j["charges"] = nuclei.charges;
  return j;
}

Json to_json(const TransportPlan& plan) {
  Json j;
  j["n_marginals"] = plan.n_marginals;
  Json entries = Json::array();
  for (const auto& [t, w] : plan.entries) {
    entries.push_back({{"tuple", t}, {"mass", w}});
  }
  j["entries"] = std::move(entries);
  return j;
}

Json to_json(const GbTable& table) {
  Json j;
  j["Z"] = table.Z;
  j["b"] = table.b;
  j["N"] = table.n_electrons;
  j["alphas"] = table.alphas;
  j["values"] = table.values;
  Json methods = Json::array();
  for (GbMethod m : table.methods) methods.push_back(to_string(m));
  j["methods"] = std::move(methods);
  return j;
}

namespace {

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw config_error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

bool is_discrete_measure(const Json& j) {
  return j.value("type", "") == "discrete";
}

DiscreteMeasure discrete_from_json(const Json& j) {
  if (j.value("type", "") != "discrete") throw config_error("measure: expected type \"discrete\"");
  std::vector<Vec3> pts;
  for (const Json& p : j.at("points")) pts.push_back(vec3_from_json(p));
  std::vector<double> w = j.at("weights").get<std::vector<double>>();
  return {std::move(pts), std::move(w)};
}

RadialDensity radial_from_json(const Json& j) {
  if (j.value("type", "") != "radial") throw config_error("measure: expected type \"radial\"");
  const double r_max = j.at("r_max").get<double>();
  const int J = j.at("J").get<int>();
  std::vector<double> m = j.at("mass_density").get<std::vector<double>>();
  if (static_cast<int>(m.size()) != J + 1) throw config_error("radial measure: mass_density size must be J+1");
  Vec3 center{0, 0, 0};
  if (j.contains("center")) center = vec3_from_json(j.at("center"));
  RadialDensity grid = RadialDensity::uniform_grid(r_max, J, center);
  return {grid.radii(), std::move(m), center};
}

NucleiConfig nuclei_from_json(const Json& j) {
  std::vector<Vec3> pos;
  for (const Json& p : j.at("positions")) pos.push_back(vec3_from_json(p));
  return {std::move(pos), j.at("charges").get<std::vector<double>>()};
}

GbTable gb_table_from_json(const Json& j) {
  GbTable t;
  t.Z = j.at("Z").get<double>();
  t.b = j.at("b").get<double>();
  t.n_electrons = j.at("N").get<int>();
  t.alphas = j.at("alphas").get<std::vector<double>>();
  t.values = j.at("values").get<std::vector<double>>();
  for (const Json& m : j.at("methods")) {
    const std::string s = m.get<std::string>();
    if (s == "analytic_small_alpha") {
      t.methods.push_back(GbMethod::analytic_small_alpha);
    } else if (s == "solved_n2") {
      t.methods.push_back(GbMethod::solved_n2);
    } else if (s == "solved_ball") {
      t.methods.push_back(GbMethod::solved_ball);
    } else {
      throw config_error("gb table: unknown method tag " + s);
    }
  }
  return t;
}

std::string gb_table_csv(const GbTable& table) {
  std::ostringstream out;
  out << "alpha,value,method\n";
  char buf[80];
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", table.alphas[i], table.values[i],
                  to_string(table.methods[i]).c_str());
    out << buf;
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace scedft
