#include "lojlab/cylinder_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "lojlab/errors.hpp"
#include "lojlab/kernels/kernels.hpp"

namespace lojlab::cyl {

double sphere_area(int k) {
  const double m = static_cast<double>(k + 1);
  return 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
}

CylinderSpec CylinderSpec::make(int k) {
  if (k < 1) throw ParameterError("sphere dimension k must be >= 1");
  CylinderSpec s;
  s.k = k;
  s.n = k + 1;
  s.radius = std::sqrt(2.0 * k);
  s.F_value = cylinder_F(s);
  return s;
}

double cylinder_F(const CylinderSpec& spec) {
  const double k = spec.k;
  return std::pow(4.0 * std::numbers::pi, -k / 2.0) * sphere_area(spec.k) * std::pow(2.0 * k, k / 2.0) *
         std::exp(-k / 2.0);
}

CylinderGraph::CylinderGraph(CylinderSpec spec, double R_dom, double h)
    : spec_(spec), R_dom_(R_dom), h_(h) {
  if (!(R_dom > 0.0) || !(h > 0.0)) throw InvalidInputError("R_dom and h must be positive");
  const double cells = 2.0 * R_dom / h;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * rounded || rounded < 4.0) {
    throw InvalidInputError("2 R_dom / h must be an integer >= 4");
  }
  const auto n = static_cast<std::size_t>(rounded) + 1;
  z_.resize(n);
  for (std::size_t i = 0; i < n; ++i) z_[i] = -R_dom + static_cast<double>(i) * h;
  z_.back() = R_dom;
  u_.assign(n, 0.0);
}

CylinderGraph CylinderGraph::from_profile(const CylinderSpec& spec, double R_dom, double h,
                                          const std::function<double(double)>& f) {
  CylinderGraph g(spec, R_dom, h);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) g.u_[i] = f(g.z_[i]);
  return g;
}

void CylinderGraph::validate() const {
  if (u_.front() != 0.0 || u_.back() != 0.0) throw GeometryError("profile is not pinned at the domain ends");
  for (std::size_t i = 0; i < u_.size(); ++i) {
    if (!(spec_.radius + u_[i] > 0.0)) {
      throw GeometryError("non-positive radius at z = " + std::to_string(z_[i]));
    }
  }
}

AreaReport graph_F_report(const CylinderGraph& g, double scale, double shift) {
  g.validate();
  const CylinderSpec& s = g.spec();
  const double n = s.n;
  const double prefactor = std::pow(4.0 * std::numbers::pi, -n / 2.0) * sphere_area(s.k) * std::pow(scale, n);

  kernels::AreaParams p;
  p.h = g.h();
  p.rho = s.radius;
  p.k = s.k;
  p.scale = scale;
  p.shift = shift;
  AreaReport r;
  r.interior = prefactor * kernels::active().area(g.u().data(), g.z().data(), g.size(), p);

  // Flat cylinder beyond the domain: int_{|z|>R} exp(-(shift + scale z)^2/4) dz.
  const double R = g.R_dom();
  const double rho = s.radius;
  const double flat = prefactor * std::pow(rho, s.k) * std::exp(-0.25 * scale * scale * rho * rho);
  const double axial = std::sqrt(std::numbers::pi) / scale *
                       (std::erfc((shift + scale * R) / 2.0) + std::erfc((scale * R - shift) / 2.0));
  r.tail = flat * axial;
  r.tail_bound = r.tail;
  r.value = r.interior + r.tail;
  return r;
}

double graph_F(const CylinderGraph& g) { return graph_F_report(g).value; }

namespace {

DistanceReport c2_norm(std::span<const double> z, std::span<const double> u, double h, double R,
                       double R_dom) {
  if (!(R >= 0.0) || R > R_dom - 2.0 * h + 1e-12) {
    throw PreconditionError("measurement radius must satisfy 0 <= R <= R_dom - 2h");
  }
  DistanceReport d;
  d.R = R;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    if (std::abs(z[i]) > R + 1e-12) continue;
    d.c0 = std::max(d.c0, std::abs(u[i]));
    d.c1 = std::max(d.c1, std::abs((u[i + 1] - u[i - 1]) / (2.0 * h)));
    d.c2 = std::max(d.c2, std::abs((u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h)));
  }
  d.dist = std::max({d.c0, d.c1, d.c2});
  return d;
}

}  // namespace

DistanceReport dist_R(const CylinderGraph& g, double R) {
  return c2_norm(g.z(), g.u(), g.h(), R, g.R_dom());
}

DistanceReport dist_between(const CylinderGraph& a, const CylinderGraph& b, double R) {
  if (a.size() != b.size() || a.h() != b.h()) throw InvalidInputError("graphs live on different grids");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.u()[i] - b.u()[i];
  return c2_norm(a.z(), diff, a.h(), R, a.R_dom());
}

EntropyEstimate estimate_entropy(const CylinderGraph& g, std::span<const double> centers,
                                 std::span<const double> scales) {
  EntropyEstimate best;
  bool first = true;
  for (double c : scales) {
    if (!(c > 0.0)) throw InvalidInputError("entropy scales must be positive");
    for (double z0 : centers) {
      const double v = graph_F_report(g, c, z0).value;
      if (first || v > best.value) {
        best = {v, z0, c};
        first = false;
      }
    }
  }
  return best;
}

void write_profile_csv(std::ostream& out, const CylinderGraph& g) {
  out << "z,u\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < g.size(); ++i) out << g.z()[i] << ',' << g.u()[i] << '\n';
  out.precision(old);
}

}  // namespace lojlab::cyl
