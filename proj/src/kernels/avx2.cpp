#include "kernels_impl.hpp"

#if defined(LOJLAB_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// Every function in this file is compiled for AVX2 via the target attribute
// only, so nothing here leaks AVX2 code into inline functions shared with
// baseline translation units.
#define LOJLAB_AVX2 __attribute__((target("avx2")))

namespace lojlab::kernels::avx2 {

namespace {

LOJLAB_AVX2 inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(hi, lo);
  __m128d s = _mm_unpackhi_pd(m, m);
  return _mm_cvtsd_f64(_mm_max_sd(s, m));
}

LOJLAB_AVX2 inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_min_pd(hi, lo);
  __m128d s = _mm_unpackhi_pd(m, m);
  return _mm_cvtsd_f64(_mm_min_sd(s, m));
}

LOJLAB_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d h = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, h));
}

// exp with Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, and a degree-13
// Taylor polynomial (truncation below 5e-18 relative). Arguments below -708
// return 0.
LOJLAB_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-708.0);
  const __m256d hi_limit = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, ln2_hi));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, ln2_lo));

  static constexpr double inv_fact[14] = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0,
  };
  __m256d poly = _mm256_set1_pd(inv_fact[13]);
  for (int i = 12; i >= 0; --i) {
    poly = _mm256_add_pd(_mm256_mul_pd(poly, r), _mm256_set1_pd(inv_fact[i]));
  }

  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(ni);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d result = _mm256_mul_pd(poly, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

}  // namespace

LOJLAB_AVX2 double rhs(const double* u, const double* z, std::size_t n, const RhsParams& p, double* out) {
  if (n < 3) return scalar::rhs(u, z, n, p, out);
  const double inv2h_s = 1.0 / (2.0 * p.h);
  const double invh2_s = 1.0 / (p.h * p.h);
  const __m256d inv2h = _mm256_set1_pd(inv2h_s);
  const __m256d invh2 = _mm256_set1_pd(invh2_s);
  const __m256d rho = _mm256_set1_pd(p.rho);
  const __m256d two_rho = _mm256_set1_pd(p.rho + p.rho);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);

  __m256d vmin = _mm256_set1_pd(p.rho + u[0]);
  out[0] = 0.0;
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d up = _mm256_loadu_pd(u + i + 1);
    const __m256d um = _mm256_loadu_pd(u + i - 1);
    const __m256d uc = _mm256_loadu_pd(u + i);
    const __m256d uz = _mm256_mul_pd(_mm256_sub_pd(up, um), inv2h);
    const __m256d uzz = _mm256_mul_pd(_mm256_sub_pd(_mm256_add_pd(up, um), _mm256_add_pd(uc, uc)), invh2);
    const __m256d diffusion = _mm256_div_pd(uzz, _mm256_add_pd(one, _mm256_mul_pd(uz, uz)));
    const __m256d r = _mm256_add_pd(rho, uc);
    const __m256d reaction = _mm256_div_pd(_mm256_mul_pd(uc, _mm256_add_pd(two_rho, uc)), _mm256_add_pd(r, r));
    const __m256d advection = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_loadu_pd(z + i)), uz);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_add_pd(diffusion, reaction), advection));
    vmin = _mm256_min_pd(r, vmin);
  }
  double min_r = hmin(vmin);
  for (; i + 1 < n; ++i) {
    const double up = u[i + 1], um = u[i - 1], uc = u[i];
    const double uz = (up - um) * inv2h_s;
    const double uzz = ((up + um) - (uc + uc)) * invh2_s;
    const double diffusion = uzz / (1.0 + uz * uz);
    const double r = p.rho + uc;
    const double reaction = (uc * ((p.rho + p.rho) + uc)) / (r + r);
    const double advection = (0.5 * z[i]) * uz;
    out[i] = (diffusion + reaction) - advection;
    min_r = std::min(min_r, r);
  }
  out[n - 1] = 0.0;
  return std::min(min_r, p.rho + u[n - 1]);
}

LOJLAB_AVX2 double area(const double* u, const double* z, std::size_t n, const AreaParams& p) {
  if (n < 3) return 0.0;
  const double inv2h_s = 1.0 / (2.0 * p.h);
  const double uz0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h_s;
  const double uzn = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h_s;
  double ends = 0.5 * scalar::area_term(p.rho + u[0], uz0, z[0], p) +
                0.5 * scalar::area_term(p.rho + u[n - 1], uzn, z[n - 1], p);

  const __m256d inv2h = _mm256_set1_pd(inv2h_s);
  const __m256d rho = _mm256_set1_pd(p.rho);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d quarter = _mm256_set1_pd(-0.25);
  const __m256d scale = _mm256_set1_pd(p.scale);
  const __m256d shift = _mm256_set1_pd(p.shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d uc = _mm256_loadu_pd(u + i);
    const __m256d uz = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(u + i + 1), _mm256_loadu_pd(u + i - 1)), inv2h);
    const __m256d r = _mm256_add_pd(rho, uc);
    __m256d rk = one;
    for (int j = 0; j < p.k; ++j) rk = _mm256_mul_pd(rk, r);
    const __m256d w = _mm256_add_pd(shift, _mm256_mul_pd(scale, _mm256_loadu_pd(z + i)));
    const __m256d sr = _mm256_mul_pd(scale, r);
    const __m256d arg = _mm256_mul_pd(quarter, _mm256_add_pd(_mm256_mul_pd(sr, sr), _mm256_mul_pd(w, w)));
    const __m256d jac = _mm256_sqrt_pd(_mm256_add_pd(one, _mm256_mul_pd(uz, uz)));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(rk, jac), exp_pd(arg)));
  }
  double sum = hsum(acc);
  for (; i + 1 < n; ++i) {
    const double uz = (u[i + 1] - u[i - 1]) * inv2h_s;
    sum += scalar::area_term(p.rho + u[i], uz, z[i], p);
  }
  return (sum + ends) * p.h;
}

LOJLAB_AVX2 double max_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    vmax = _mm256_max_pd(d, vmax);
  }
  double m = hmax(vmax);
  for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

LOJLAB_AVX2 void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)), _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

LOJLAB_AVX2 void exp4(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = i; j < n; ++j) buf[j - i] = x[j];
    double res[4];
    _mm256_storeu_pd(res, exp_pd(_mm256_loadu_pd(buf)));
    for (std::size_t j = i; j < n; ++j) out[j] = res[j - i];
  }
}

}  // namespace lojlab::kernels::avx2

#endif  // LOJLAB_HAVE_AVX2
