#include "scedft/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scedft/errors.hpp"

namespace scedft {

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) {
    acc += 0.5 * (x[j] - x[j - 1]) * (y[j] + y[j - 1]);
  }
  return acc;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Vec3> points, std::vector<double> weights) {
  if (points.size() != weights.size()) {
    throw invalid_argument_error("DiscreteMeasure: points/weights length mismatch");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw invalid_argument_error("DiscreteMeasure: negative weight at index " + std::to_string(i));
    }
    // Merge into an existing point when within the merge threshold.
    bool merged = false;
    for (std::size_t k = 0; k < points_.size(); ++k) {
      if (distance(points_[k], points[i]) < tol::merge) {
        weights_[k] += weights[i];
        merged = true;
        break;
      }
    }
    if (!merged) {
      points_.push_back(points[i]);
      weights_.push_back(weights[i]);
    }
  }
  mass_ = 0.0;
  for (double w : weights_) mass_ += w;
  if (mass_ > 1.0 + tol::mass) {
    throw invalid_argument_error("DiscreteMeasure: total mass " + std::to_string(mass_) +
                                 " exceeds subprobability bound");
  }
}

DiscreteMeasure DiscreteMeasure::translated(const Vec3& shift) const {
  std::vector<Vec3> pts = points_;
  for (Vec3& p : pts) p = p + shift;
  return {std::move(pts), weights_};
}

RadialDensity::RadialDensity(std::vector<double> radii, std::vector<double> mass_density, Vec3 center)
    : radii_(std::move(radii)), mass_density_(std::move(mass_density)), center_(center) {
  validate();
}

void RadialDensity::validate() {
  if (radii_.size() < 2 || radii_.size() != mass_density_.size()) {
    throw invalid_argument_error("RadialDensity: need matching grids with at least two nodes");
  }
  if (radii_.front() != 0.0) {
    throw invalid_argument_error("RadialDensity: grid must start at r = 0");
  }
  for (std::size_t j = 1; j < radii_.size(); ++j) {
    if (!(radii_[j] > radii_[j - 1])) {
      throw invalid_argument_error("RadialDensity: radii must be strictly increasing");
    }
  }
  // The 4 pi r^2 factor forces m(0) = 0.
  mass_density_[0] = 0.0;
  for (std::size_t j = 1; j < mass_density_.size(); ++j) {
    if (!(mass_density_[j] >= 0.0)) {
      throw invalid_density_error("RadialDensity: negative mass density at node " + std::to_string(j));
    }
  }
  const double m = trapezoid(radii_, mass_density_);
  if (m > 1.0 + tol::mass) {
    throw invalid_argument_error("RadialDensity: total mass " + std::to_string(m) +
                                 " exceeds subprobability bound");
  }
}

RadialDensity RadialDensity::uniform_grid(double r_max, int intervals, Vec3 center) {
  if (!(r_max > 0.0) || intervals < 1) {
    throw invalid_argument_error("RadialDensity: bad grid parameters");
  }
  RadialDensity d;
  d.center_ = center;
  d.radii_.resize(intervals + 1);
  d.mass_density_.assign(intervals + 1, 0.0);
  for (int j = 0; j <= intervals; ++j) {
    d.radii_[j] = r_max * static_cast<double>(j) / intervals;
  }
  return d;
}

double RadialDensity::interpolate(double r) const {
  if (r < 0.0 || r > radii_.back()) return 0.0;
  const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
  if (it == radii_.begin()) return mass_density_.front();
  if (it == radii_.end()) return mass_density_.back();
  const std::size_t j = static_cast<std::size_t>(it - radii_.begin());
  const double t = (r - radii_[j - 1]) / (radii_[j] - radii_[j - 1]);
  return (1.0 - t) * mass_density_[j - 1] + t * mass_density_[j];
}

std::vector<double> RadialDensity::cumulative_mass() const {
  std::vector<double> F(radii_.size(), 0.0);
  for (std::size_t j = 1; j < radii_.size(); ++j) {
    F[j] = F[j - 1] + 0.5 * (radii_[j] - radii_[j - 1]) * (mass_density_[j] + mass_density_[j - 1]);
  }
  return F;
}

NucleiConfig::NucleiConfig(std::vector<Vec3> pos, std::vector<double> Z)
    : positions(std::move(pos)), charges(std::move(Z)) {
  if (positions.empty() || positions.size() != charges.size()) {
    throw invalid_argument_error("NucleiConfig: need matching, nonempty positions/charges");
  }
  for (double z : charges) {
    if (!(z > 0.0)) throw invalid_argument_error("NucleiConfig: charges must be positive");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t k = i + 1; k < positions.size(); ++k) {
      if (distance(positions[i], positions[k]) == 0.0) {
        throw invalid_argument_error("NucleiConfig: positions must be pairwise distinct");
      }
    }
  }
}

double total_mass(const DiscreteMeasure& rho) { return rho.mass(); }

double total_mass(const RadialDensity& rho) {
  return trapezoid(rho.radii(), rho.mass_density());
}

DiscreteMeasure scale_measure(const DiscreteMeasure& rho, double s) {
  if (!(s > 0.0)) throw invalid_argument_error("scale_measure: s must be positive");
  std::vector<Vec3> pts = rho.points();
  for (Vec3& p : pts) p = (1.0 / s) * p;
  return {std::move(pts), rho.weights()};
}

RadialDensity scale_measure(const RadialDensity& rho, double s) {
  if (!(s > 0.0)) throw invalid_argument_error("scale_measure: s must be positive");
  // m^s(r) = s * m(s r), resampled by linear interpolation; mass drift from
  // the resampling is reported by total_mass rather than renormalized away.
  std::vector<double> m(rho.nodes());
  for (std::size_t j = 0; j < rho.nodes(); ++j) {
    m[j] = s * rho.interpolate(s * rho.radii()[j]);
  }
  return {rho.radii(), std::move(m), rho.center()};
}

AtomicDecomposition decompose_atoms(const DiscreteMeasure& rho, const NucleiConfig& nuclei, double radius_tol) {
  if (!(radius_tol >= 0.0)) throw invalid_argument_error("decompose_atoms: radius_tol must be >= 0");
  std::vector<double> alpha(nuclei.size(), 0.0);
  std::vector<Vec3> diffuse_pts;
  std::vector<double> diffuse_w;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    long assigned = -1;
    for (std::size_t k = 0; k < nuclei.size(); ++k) {
      if (distance(rho.point(i), nuclei.positions[k]) <= radius_tol) {
        if (assigned >= 0) {
          throw ambiguous_assignment_error("decompose_atoms: point " + std::to_string(i) +
                                           " lies within radius_tol of two nuclei");
        }
        assigned = static_cast<long>(k);
      }
    }
    if (assigned >= 0) {
      alpha[assigned] += rho.weight(i);
    } else {
      diffuse_pts.push_back(rho.point(i));
      diffuse_w.push_back(rho.weight(i));
    }
  }
  AtomicDecomposition out;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] > 0.0) out.atoms.emplace_back(k, alpha[k]);
  }
  out.diffuse = DiscreteMeasure(std::move(diffuse_pts), std::move(diffuse_w));
  return out;
}

double variance(const DiscreteMeasure& rho) {
  if (!(rho.mass() > 0.0)) throw invalid_argument_error("variance: measure has zero mass");
  Vec3 mean{0, 0, 0};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    mean = mean + (rho.weight(i) / rho.mass()) * rho.point(i);
  }
  double var = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const Vec3 d = rho.point(i) - mean;
    var += (rho.weight(i) / rho.mass()) * dot(d, d);
  }
  return var;
}

double self_interaction(const DiscreteMeasure& rho) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho.weight(i) > 0.0) return kInf;  // diagonal term diverges on atoms
  }
  return 0.0;
}

double self_interaction_offdiag(const DiscreteMeasure& rho) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (i == j) continue;
      const double d = distance(rho.point(i), rho.point(j));
      if (d < tol::coincidence) return kInf;
      acc += rho.weight(i) * rho.weight(j) / d;
    }
  }
  return acc;
}

}  // namespace scedft
