#include "sbm/kernels.hpp"

#if SBM_HAVE_AVX2_KERNELS

#include <cmath>
#include <immintrin.h>
#include <vector>

#define SBM_AVX2 __attribute__((target("avx2,fma")))

namespace sbm::kernels::avx2 {

namespace {

SBM_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

SBM_AVX2 inline void axpy_impl(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

} // namespace

SBM_AVX2 void axpy(std::size_t n, double a, const double* x, double* y) { axpy_impl(n, a, x, y); }

SBM_AVX2 double dot(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

SBM_AVX2 void weighted_gram(std::size_t nq, std::size_t n, const double* w, const double* A,
                            const double* B, double* out) {
  for (std::size_t q = 0; q < nq; ++q) {
    const double* a = A + q * n;
    const double* b = B + q * n;
    for (std::size_t i = 0; i < n; ++i) axpy_impl(n, w[q] * a[i], b, out + i * n);
  }
}

SBM_AVX2 void outer_add(std::size_t m, std::size_t n, double alpha, const double* x,
                        const double* y, double* out) {
  for (std::size_t i = 0; i < m; ++i) axpy_impl(n, alpha * x[i], y, out + i * n);
}

SBM_AVX2 void abs_row_sums(std::size_t m, std::size_t k, std::size_t n, const double* X,
                           const double* M, double* rows) {
  std::vector<double> acc(n);
  const __m256d signmask = _mm256_set1_pd(-0.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t l = 0; l < k; ++l) axpy_impl(n, X[i * k + l], M + l * n, acc.data());
    __m256d s = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) s = _mm256_add_pd(s, _mm256_andnot_pd(signmask, _mm256_loadu_pd(acc.data() + j)));
    double t = hsum(s);
    for (; j < n; ++j) t += std::abs(acc[j]);
    rows[i] = t;
  }
}

} // namespace sbm::kernels::avx2

#endif
