#include <atomic>
#include <cstdlib>
#include <cstring>

#include "sbm/kernels.hpp"

namespace sbm::kernels {

namespace {

Isa detect() {
  const char* env = std::getenv("SBM_ISA");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  if (isa_available(Isa::avx2)) return Isa::avx2;
  return Isa::scalar;
}

std::atomic<int>& current() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

} // namespace

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if SBM_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(current().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) isa = Isa::scalar;
  current().store(static_cast<int>(isa));
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#if SBM_HAVE_AVX2_KERNELS
#define SBM_DISPATCH(fn, ...)                                   \
  (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SBM_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void axpy(std::size_t n, double a, const double* x, double* y) { SBM_DISPATCH(axpy, n, a, x, y); }

double dot(std::size_t n, const double* x, const double* y) { return SBM_DISPATCH(dot, n, x, y); }

void weighted_gram(std::size_t nq, std::size_t n, const double* w, const double* A,
                   const double* B, double* out) {
  SBM_DISPATCH(weighted_gram, nq, n, w, A, B, out);
}

void outer_add(std::size_t m, std::size_t n, double alpha, const double* x, const double* y,
               double* out) {
  SBM_DISPATCH(outer_add, m, n, alpha, x, y, out);
}

void abs_row_sums(std::size_t m, std::size_t k, std::size_t n, const double* X, const double* M,
                  double* rows) {
  SBM_DISPATCH(abs_row_sums, m, k, n, X, M, rows);
}

} // namespace sbm::kernels
