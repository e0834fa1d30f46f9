#pragma once

// Data-parallel inner loops of the cylinder solver. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant selected at run
// time. The rhs and max_abs_diff variants are bit-identical to the scalar
// reference (same operation order, no contraction); the Gaussian area
// kernel differs only by summation order and the vector exp.

#include <cstddef>
#include <string_view>

namespace lojlab::kernels {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend b);

/// Parameters of the rescaled MCF right-hand side on a uniform grid.
struct RhsParams {
  double h = 0.0;
  /// Cylinder radius sqrt(2k).
  double rho = 0.0;
  int k = 1;
};

/// Writes r_t on interior points 1..n-2 (boundary entries set to zero) and
/// returns min over all points of r = rho + u.
using RhsFn = double (*)(const double* u, const double* z, std::size_t n, const RhsParams& p,
                         double* out);

/// Gaussian area integrand under a dilation by `scale` and an axial shift:
///   r^k sqrt(1 + u_z^2) exp(-(scale^2 r^2 + (shift + scale z)^2) / 4),
/// summed with trapezoid weights. u_z uses central differences inside and
/// second-order one-sided differences at the two ends.
struct AreaParams {
  double h = 0.0;
  double rho = 0.0;
  int k = 1;
  double scale = 1.0;
  double shift = 0.0;
};

using AreaFn = double (*)(const double* u, const double* z, std::size_t n, const AreaParams& p);

using MaxAbsDiffFn = double (*)(const double* a, const double* b, std::size_t n);

/// y[i] = a * x[i] + b * y[i]
using AxpbyFn = void (*)(double a, const double* x, double b, double* y, std::size_t n);

struct KernelTable {
  Backend backend = Backend::Scalar;
  RhsFn rhs = nullptr;
  AreaFn area = nullptr;
  MaxAbsDiffFn max_abs_diff = nullptr;
  AxpbyFn axpby = nullptr;
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

/// Best supported backend, overridable with LOJLAB_SIMD=scalar|avx2.
Backend detect_backend();

/// Kernel table in use. Selected on first call from detect_backend().
const KernelTable& active();

/// Throws lojlab::ParameterError when the backend is unavailable.
void select(Backend b);

/// Exposed for testing: vectorised exp on 4 lanes, scalar fallback otherwise.
void exp_batch(const double* x, double* out, std::size_t n, Backend b);

}  // namespace lojlab::kernels
