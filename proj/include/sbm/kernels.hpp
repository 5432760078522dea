#pragma once

#include <cstddef>

namespace sbm::kernels {

enum class Isa { scalar, avx2 };

// picked once from cpuid; SBM_ISA=scalar in the environment pins the scalar path
Isa active_isa();
void force_isa(Isa isa);
bool isa_available(Isa isa);
const char* isa_name(Isa isa);

// y += a x
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
// out(n x n, row-major) += sum_q w[q] A(q,:)^T B(q,:), A and B are nq x n row-major
void weighted_gram(std::size_t nq, std::size_t n, const double* w, const double* A,
                   const double* B, double* out);
// out(m x n) += alpha x y^T
void outer_add(std::size_t m, std::size_t n, double alpha, const double* x, const double* y,
               double* out);
// rows[i] = sum_j |(X M)(i,j)|, X is m x k and M is k x n, both row-major
void abs_row_sums(std::size_t m, std::size_t k, std::size_t n, const double* X, const double* M,
                  double* rows);

namespace scalar {
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void weighted_gram(std::size_t nq, std::size_t n, const double* w, const double* A,
                   const double* B, double* out);
void outer_add(std::size_t m, std::size_t n, double alpha, const double* x, const double* y,
               double* out);
void abs_row_sums(std::size_t m, std::size_t k, std::size_t n, const double* X, const double* M,
                  double* rows);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SBM_HAVE_AVX2_KERNELS 1
namespace avx2 {
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void weighted_gram(std::size_t nq, std::size_t n, const double* w, const double* A,
                   const double* B, double* out);
void outer_add(std::size_t m, std::size_t n, double alpha, const double* x, const double* y,
               double* out);
void abs_row_sums(std::size_t m, std::size_t k, std::size_t n, const double* X, const double* M,
                  double* rows);
} // namespace avx2
#else
#define SBM_HAVE_AVX2_KERNELS 0
#endif

} // namespace sbm::kernels
