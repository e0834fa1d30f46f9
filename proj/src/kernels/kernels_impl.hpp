#pragma once

#include "lojlab/kernels/kernels.hpp"

namespace lojlab::kernels {

namespace scalar {
double rhs(const double* u, const double* z, std::size_t n, const RhsParams& p, double* out);
double area_term(double r, double uz, double zi, const AreaParams& p);
double area(const double* u, const double* z, std::size_t n, const AreaParams& p);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void axpby(double a, const double* x, double b, double* y, std::size_t n);
}  // namespace scalar

#if defined(LOJLAB_HAVE_AVX2)
namespace avx2 {
double rhs(const double* u, const double* z, std::size_t n, const RhsParams& p, double* out);
double area(const double* u, const double* z, std::size_t n, const AreaParams& p);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void axpby(double a, const double* x, double b, double* y, std::size_t n);
void exp4(const double* x, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace lojlab::kernels
