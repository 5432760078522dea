#pragma once

#include <vector>

#include "sbm/types.hpp"

namespace sbm {

enum class Factorization { lu, ldlt };

struct SolveInfo {
  double relative_residual = 0.0;
};

// sparse LU with COLAMD ordering; throws on a singular factorization
Vec solve(const SpMat& A, const Vec& b, Factorization f = Factorization::lu, SolveInfo* info = nullptr);

std::vector<double> singular_values(const SpMat& A);
double condition_2norm(const SpMat& A);
// Hager / Higham estimate of ||A||_1 ||A^{-1}||_1
double condition_1norm_estimate(const SpMat& A, int max_iter = 5);

struct Conditioning {
  double value = 0.0;
  bool exact_2norm = true;
};
Conditioning condition_number(const SpMat& A, int svd_limit = 2000);

} // namespace sbm
