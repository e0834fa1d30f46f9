#pragma once

// Rotationally symmetric hypersurfaces written as normal graphs over the
// shrinking cylinder S^k_{sqrt(2k)} x R, Gaussian area and graph distance.

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace lojlab::cyl {

/// Area of the unit k-sphere, 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double sphere_area(int k);

struct CylinderSpec {
  int k = 1;
  /// Hypersurface dimension n = k + 1; ambient space R^{n+1}.
  int n = 2;
  double radius = 0.0;
  /// Closed-form Gaussian area of the cylinder.
  double F_value = 0.0;

  /// Throws ParameterError unless k >= 1.
  static CylinderSpec make(int k);
};

/// (4 pi)^{-k/2} omega_k (2k)^{k/2} e^{-k/2}.
double cylinder_F(const CylinderSpec& spec);

/// Profile u on the uniform grid z_i = -R_dom + i h; surface radius is
/// sqrt(2k) + u(z), pinned to the cylinder (u = 0) at both ends.
class CylinderGraph {
 public:
  /// Zero profile. Throws InvalidInputError unless 2 R_dom / h is an integer >= 4.
  CylinderGraph(CylinderSpec spec, double R_dom, double h);

  /// Samples f on the grid and pins both ends to zero.
  static CylinderGraph from_profile(const CylinderSpec& spec, double R_dom, double h,
                                    const std::function<double(double)>& f);

  const CylinderSpec& spec() const noexcept { return spec_; }
  double R_dom() const noexcept { return R_dom_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return u_.size(); }
  std::span<const double> z() const noexcept { return z_; }
  std::span<const double> u() const noexcept { return u_; }
  std::span<double> u_mut() noexcept { return u_; }
  const std::vector<double>& z_vec() const noexcept { return z_; }
  const std::vector<double>& u_vec() const noexcept { return u_; }

  double radius_at(std::size_t i) const { return spec_.radius + u_[i]; }
  /// Throws GeometryError if r <= 0 anywhere or the ends are not pinned.
  void validate() const;

 private:
  CylinderSpec spec_;
  double R_dom_;
  double h_;
  std::vector<double> z_;
  std::vector<double> u_;
};

struct AreaReport {
  /// interior + tail.
  double value = 0.0;
  double interior = 0.0;
  /// Flat-cylinder contribution of |z| > R_dom, added to value.
  double tail = 0.0;
  /// Bound on the neglected part of the tail (the profile is pinned flat).
  double tail_bound = 0.0;
};

/// Gaussian area of the dilated and axially shifted surface shift e_z + scale * Sigma.
AreaReport graph_F_report(const CylinderGraph& g, double scale = 1.0, double shift = 0.0);

double graph_F(const CylinderGraph& g);

struct DistanceReport {
  double R = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double dist = 0.0;
};

/// Discrete C^2 norm of u on |z| <= R. Requires R <= R_dom - 2h.
DistanceReport dist_R(const CylinderGraph& g, double R);

/// dist_R of the difference of two graphs on the same grid.
DistanceReport dist_between(const CylinderGraph& a, const CylinderGraph& b, double R);

struct EntropyEstimate {
  double value = 0.0;
  double center = 0.0;
  double scale = 1.0;
};

/// max of F over axial centers and scales; a lower bound for the entropy.
EntropyEstimate estimate_entropy(const CylinderGraph& g, std::span<const double> centers,
                                 std::span<const double> scales);

void write_profile_csv(std::ostream& out, const CylinderGraph& g);

}  // namespace lojlab::cyl
