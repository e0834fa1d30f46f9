#include "kernels_impl.hpp"

#include <algorithm>
#include <cmath>

namespace lojlab::kernels::scalar {

double rhs(const double* u, const double* z, std::size_t n, const RhsParams& p, double* out) {
  const double inv2h = 1.0 / (2.0 * p.h);
  const double invh2 = 1.0 / (p.h * p.h);
  const double two_rho = p.rho + p.rho;
  double min_r = p.rho + u[0];
  out[0] = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double up = u[i + 1], um = u[i - 1], uc = u[i];
    const double uz = (up - um) * inv2h;
    const double uzz = ((up + um) - (uc + uc)) * invh2;
    const double diffusion = uzz / (1.0 + uz * uz);
    const double r = p.rho + uc;
    // (r - z r_z)/2 - k/r with r^2 - 2k written as u (2 rho + u): exact zero on the cylinder.
    const double reaction = (uc * (two_rho + uc)) / (r + r);
    const double advection = (0.5 * z[i]) * uz;
    out[i] = (diffusion + reaction) - advection;
    min_r = std::min(min_r, r);
  }
  if (n > 1) {
    out[n - 1] = 0.0;
    min_r = std::min(min_r, p.rho + u[n - 1]);
  }
  return min_r;
}

double area_term(double r, double uz, double zi, const AreaParams& p) {
  double rk = 1.0;
  for (int j = 0; j < p.k; ++j) rk *= r;
  const double w = p.shift + p.scale * zi;
  const double sr = p.scale * r;
  const double arg = -0.25 * (sr * sr + w * w);
  return rk * std::sqrt(1.0 + uz * uz) * std::exp(arg);
}

double area(const double* u, const double* z, std::size_t n, const AreaParams& p) {
  if (n < 3) return 0.0;
  const double inv2h = 1.0 / (2.0 * p.h);
  const double uz0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
  const double uzn = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h;
  double sum = 0.5 * area_term(p.rho + u[0], uz0, z[0], p);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double uz = (u[i + 1] - u[i - 1]) * inv2h;
    sum += area_term(p.rho + u[i], uz, z[i], p);
  }
  sum += 0.5 * area_term(p.rho + u[n - 1], uzn, z[n - 1], p);
  return sum * p.h;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

}  // namespace lojlab::kernels::scalar
