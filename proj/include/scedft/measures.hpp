#pragma once

#include <utility>
#include <vector>

#include "scedft/common.hpp"
#include "scedft/constants.hpp"

namespace scedft {

// Weighted point cloud in R^3 representing a Borel subprobability.
// Construction merges coincident points (distance < tol::merge), rejects
// negative weights and total mass above 1 + tol::mass. Immutable after
// construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Vec3> points, std::vector<double> weights);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double mass() const { return mass_; }

  DiscreteMeasure translated(const Vec3& shift) const;

 private:
  std::vector<Vec3> points_;
  std::vector<double> weights_;
  double mass_ = 0.0;
};

// Radially symmetric density about `center`, stored as the radial mass
// density m(r) = 4 pi r^2 rho(r) on a strictly increasing grid with r_0 = 0.
// The grid may be nonuniform; the default factory builds a uniform one.
class RadialDensity {
 public:
  RadialDensity() = default;
  RadialDensity(std::vector<double> radii, std::vector<double> mass_density, Vec3 center = {0, 0, 0});

  static RadialDensity uniform_grid(double r_max, int intervals, Vec3 center = {0, 0, 0});

  // Samples m(r) = weight * 4 pi r^2 rho(r) from a pointwise density rho(r).
  template <class RhoFn>
  static RadialDensity from_density(RhoFn&& rho, double r_max, int intervals, Vec3 center = {0, 0, 0}) {
    RadialDensity d = uniform_grid(r_max, intervals, center);
    for (std::size_t j = 0; j < d.radii_.size(); ++j) {
      const double r = d.radii_[j];
      d.mass_density_[j] = 4.0 * kPi * r * r * rho(r);
    }
    d.validate();
    return d;
  }

  std::size_t nodes() const { return radii_.size(); }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& mass_density() const { return mass_density_; }
  const Vec3& center() const { return center_; }
  double r_max() const { return radii_.back(); }

  // Linear interpolation of m; zero outside the grid.
  double interpolate(double r) const;

  // Cumulative trapezoid of m up to each node (unnormalized CDF).
  std::vector<double> cumulative_mass() const;

 private:
  void validate();

  std::vector<double> radii_;
  std::vector<double> mass_density_;
  Vec3 center_{0, 0, 0};
};

// Fixed nuclei: positions X_k and positive charges Z_k.
struct NucleiConfig {
  std::vector<Vec3> positions;
  std::vector<double> charges;

  NucleiConfig() = default;
  NucleiConfig(std::vector<Vec3> pos, std::vector<double> Z);
  std::size_t size() const { return positions.size(); }
};

// ---- operations ----

double total_mass(const DiscreteMeasure& rho);
double total_mass(const RadialDensity& rho);

// Pushforward under x -> x/s: discrete points divided by s, radial mass
// density m^s(r) = s * m(s r) resampled onto the original grid. Mass drift
// from resampling is not renormalized away.
DiscreteMeasure scale_measure(const DiscreteMeasure& rho, double s);
RadialDensity scale_measure(const RadialDensity& rho, double s);

// Splits rho into per-nucleus atomic masses (points within radius_tol of a
// nucleus) and the remaining diffuse part. A point within radius_tol of two
// nuclei is an error. Mass is conserved exactly.
struct AtomicDecomposition {
  std::vector<std::pair<std::size_t, double>> atoms;  // (nucleus index, alpha_k)
  DiscreteMeasure diffuse;
};
AtomicDecomposition decompose_atoms(const DiscreteMeasure& rho, const NucleiConfig& nuclei, double radius_tol);

// Variance of the normalized measure rho / ||rho||.
double variance(const DiscreteMeasure& rho);

// Product-measure Coulomb integral including the diagonal: +inf whenever rho
// has an atom with positive weight.
double self_interaction(const DiscreteMeasure& rho);

// Off-diagonal variant (i != j only); finite for distinct-point supports.
double self_interaction_offdiag(const DiscreteMeasure& rho);

}  // namespace scedft
