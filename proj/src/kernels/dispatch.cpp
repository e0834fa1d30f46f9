#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "lojlab/errors.hpp"

namespace lojlab::kernels {

namespace {

const KernelTable kScalar{Backend::Scalar, &scalar::rhs, &scalar::area, &scalar::max_abs_diff,
                          &scalar::axpby};

#if defined(LOJLAB_HAVE_AVX2)
const KernelTable kAvx2{Backend::Avx2, &avx2::rhs, &avx2::area, &avx2::max_abs_diff, &avx2::axpby};
#endif

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable& table_for(Backend b) {
  if (b == Backend::Avx2) {
    const KernelTable* t = avx2_table();
    if (t == nullptr || !cpu_supports_avx2()) throw ParameterError("AVX2 kernels are not available");
    return *t;
  }
  return kScalar;
}

}  // namespace

const char* to_string(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(LOJLAB_HAVE_AVX2)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() {
#if defined(LOJLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend detect_backend() {
  if (const char* env = std::getenv("LOJLAB_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && avx2_table() != nullptr && cpu_supports_avx2()) return Backend::Avx2;
  }
  return (avx2_table() != nullptr && cpu_supports_avx2()) ? Backend::Avx2 : Backend::Scalar;
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = &table_for(detect_backend());
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void select(Backend b) { g_active.store(&table_for(b), std::memory_order_release); }

void exp_batch(const double* x, double* out, std::size_t n, Backend b) {
#if defined(LOJLAB_HAVE_AVX2)
  if (b == Backend::Avx2) {
    table_for(b);
    avx2::exp4(x, out, n);
    return;
  }
#endif
  if (b == Backend::Avx2) table_for(b);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

}  // namespace lojlab::kernels
