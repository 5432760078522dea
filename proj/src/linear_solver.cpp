#include "sbm/linear_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace sbm {

Vec solve(const SpMat& A, const Vec& b, Factorization f, SolveInfo* info) {
  require(A.rows() == A.cols() && A.rows() == b.size(), "solve: dimension mismatch");
  Vec x;
  if (f == Factorization::ldlt) {
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw Error("solve: LDLT factorization failed");
    x = ldlt.solve(b);
  } else {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw Error("solve: singular matrix (" + lu.lastErrorMessage() + ")");
    x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw Error("solve: back substitution failed");
  }
  if (!x.allFinite()) throw Error("solve: non-finite solution (singular matrix)");
  if (info) {
    const double nb = b.norm();
    info->relative_residual = (A * x - b).norm() / (nb > 0 ? nb : 1.0);
  }
  return x;
}

std::vector<double> singular_values(const SpMat& A) {
  Mat D(A);
  Eigen::BDCSVD<Mat> svd(D);
  const Vec& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

double condition_2norm(const SpMat& A) {
  const std::vector<double> s = singular_values(A);
  if (s.empty()) return 0.0;
  if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / s.back();
}

double condition_1norm_estimate(const SpMat& A, int max_iter) {
  const Eigen::Index n = A.rows();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu, lut;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  SpMat At = A.transpose();
  lut.compute(At);
  double anorm = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double s = 0.0;
    for (SpMat::InnerIterator it(A, k); it; ++it) s += std::abs(it.value());
    anorm = std::max(anorm, s);
  }
  Vec x = Vec::Constant(n, 1.0 / n);
  double est = 0.0;
  Eigen::Index last = -1;
  for (int it = 0; it < max_iter; ++it) {
    Vec y = lu.solve(x);
    const double e = y.lpNorm<1>();
    if (it > 0 && e <= est) break;
    est = e;
    Vec xi = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    Vec z = lut.solve(xi);
    Eigen::Index j;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (it > 0 && (zmax <= z.dot(x) || j == last)) break;
    last = j;
    x.setZero();
    x(j) = 1.0;
  }
  // alternating-sign probe (Higham) guards against a poor local maximum
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = (i % 2 ? -1.0 : 1.0) * (1.0 + double(i) / std::max<Eigen::Index>(n - 1, 1));
  const double alt = 2.0 * lu.solve(v).lpNorm<1>() / (3.0 * n);
  return anorm * std::max(est, alt);
}

Conditioning condition_number(const SpMat& A, int svd_limit) {
  if (A.rows() <= svd_limit) return {condition_2norm(A), true};
  return {condition_1norm_estimate(A), false};
}

} // namespace sbm
