#include <cmath>
#include <vector>

#include "sbm/kernels.hpp"

namespace sbm::kernels::scalar {

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void weighted_gram(std::size_t nq, std::size_t n, const double* w, const double* A,
                   const double* B, double* out) {
  for (std::size_t q = 0; q < nq; ++q) {
    const double* a = A + q * n;
    const double* b = B + q * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = w[q] * a[i];
      double* o = out + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += c * b[j];
    }
  }
}

void outer_add(std::size_t m, std::size_t n, double alpha, const double* x, const double* y,
               double* out) {
  for (std::size_t i = 0; i < m; ++i) {
    const double c = alpha * x[i];
    double* o = out + i * n;
    for (std::size_t j = 0; j < n; ++j) o[j] += c * y[j];
  }
}

void abs_row_sums(std::size_t m, std::size_t k, std::size_t n, const double* X, const double* M,
                  double* rows) {
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t l = 0; l < k; ++l) {
      const double c = X[i * k + l];
      const double* mr = M + l * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += c * mr[j];
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(acc[j]);
    rows[i] = s;
  }
}

} // namespace sbm::kernels::scalar
