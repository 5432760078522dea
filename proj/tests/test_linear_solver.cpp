#include <doctest.h>

#include <cmath>

#include "sbm/experiments.hpp"
#include "sbm/linear_solver.hpp"
#include "sbm/mms.hpp"
#include "sbm/rng.hpp"

using namespace sbm;

namespace {

SpMat sparse(const Mat& D) { return D.sparseView(); }

Mat random_matrix(SplitMix64& rng, int n) {
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1, 1);
  return A;
}

} // namespace

TEST_SUITE("linear_solver") {

TEST_CASE("identity") {
  SpMat I(5, 5);
  I.setIdentity();
  const Vec b = Vec::LinSpaced(5, 1, 5);
  CHECK((solve(I, b) - b).norm() == 0.0);
  CHECK(condition_2norm(I) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("diagonal and orthogonal conditioning") {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 1e-12;
  CHECK(condition_2norm(sparse(D)) == doctest::Approx(1e12).epsilon(1e-12));
  SplitMix64 rng(3);
  const Mat Q = Eigen::HouseholderQR<Mat>(random_matrix(rng, 12)).householderQ();
  CHECK(condition_2norm(sparse(Q)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Hilbert 5x5") {
  Mat H(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) H(i, j) = 1.0 / (i + j + 1);
  CHECK(condition_2norm(sparse(H)) == doctest::Approx(4.766072502e5).epsilon(1e-8));
}

TEST_CASE("one-norm estimate against the exact one-norm condition number") {
  SplitMix64 rng(2024);
  for (int t = 0; t < 50; ++t) {
    Mat A = random_matrix(rng, 100);
    // sparsify a little so the matrices are not all alike
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j)
        if (rng.uniform() < 0.5 && i != j) A(i, j) = 0;
    const SpMat S = sparse(A);
    const double k1 = condition_1norm_estimate(S);
    const double exact = A.cwiseAbs().colwise().sum().maxCoeff() * A.inverse().cwiseAbs().colwise().sum().maxCoeff();
    // the estimate is a lower bound, rarely off by more than a small factor
    CHECK(k1 <= exact * (1 + 1e-10));
    CHECK(exact / k1 < 10);
  }
}

TEST_CASE("condition_number switches to the estimate above the limit") {
  SplitMix64 rng(5);
  const SpMat S = sparse(random_matrix(rng, 30) + 10 * Mat::Identity(30, 30));
  CHECK(condition_number(S, 100).exact_2norm);
  CHECK_FALSE(condition_number(S, 10).exact_2norm);
  CHECK(condition_number(S, 100).value == doctest::Approx(condition_2norm(S)));
}

TEST_CASE("singular systems are reported") {
  Mat D = Mat::Identity(4, 4);
  D(2, 2) = 0;
  CHECK_THROWS_AS(solve(sparse(D), Vec::Ones(4)), Error);
  CHECK_THROWS_AS(solve(sparse(Mat::Identity(3, 3)), Vec::Ones(4)), Error);
}

TEST_CASE("LU and LDLT agree on an SPD system") {
  SplitMix64 rng(8);
  const Mat B = random_matrix(rng, 40);
  const SpMat S = sparse(B * B.transpose() + 40 * Mat::Identity(40, 40));
  const Vec b = Vec::Ones(40);
  SolveInfo info;
  const Vec x = solve(S, b, Factorization::lu, &info);
  CHECK(info.relative_residual < 1e-13);
  CHECK((x - solve(S, b, Factorization::ldlt)).norm() < 1e-12 * x.norm());
}

TEST_CASE("CBM Dirichlet P2 conditioning grows like h^-2") {
  std::vector<double> h, k;
  const Manufactured mms = Manufactured::preset("canonical");
  for (double lc : {0.2, 0.1, 0.07, 0.05}) {
    const TriMesh m = experiments::aligned_disk_mesh(Method::cbm, lc);
    const SurrogateDomain d = build_surrogate(m, nullptr, Method::cbm, 2);
    const AssembledSystem s = assemble(d, ReferenceElement(2), mms_problem(mms, BcKind::dirichlet, 0));
    h.push_back(d.stats.h_max);
    k.push_back(condition_2norm(s.A));
  }
  CHECK(fit_slope(h, k) == doctest::Approx(-2.0).epsilon(0.2));
}

}
