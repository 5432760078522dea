// generated-case invariant suites, 100+ cases each
#include <doctest.h>

#include <cmath>

#include "sbm/assembly.hpp"
#include "sbm/experiments.hpp"
#include "sbm/kernels.hpp"
#include "sbm/mms.hpp"
#include "sbm/rng.hpp"

using namespace sbm;

namespace {

constexpr int kCases = 120;
const Vec2 kC(0.5, 0.5);

// random polynomial of total degree <= P
struct Poly {
  int P;
  std::vector<double> c;
  double operator()(const Vec2& x) const {
    double s = 0;
    int k = 0;
    for (int a = 0; a <= P; ++a)
      for (int b = 0; a + b <= P; ++b) s += c[k++] * std::pow(x.x(), a) * std::pow(x.y(), b);
    return s;
  }
  Vec2 grad(const Vec2& x) const {
    Vec2 g = Vec2::Zero();
    int k = 0;
    for (int a = 0; a <= P; ++a)
      for (int b = 0; a + b <= P; ++b) {
        if (a) g.x() += c[k] * a * std::pow(x.x(), a - 1) * std::pow(x.y(), b);
        if (b) g.y() += c[k] * b * std::pow(x.x(), a) * std::pow(x.y(), b - 1);
        ++k;
      }
    return g;
  }
};

Poly random_poly(SplitMix64& rng, int P) {
  Poly p{P, std::vector<double>(num_nodes(P))};
  for (double& v : p.c) v = rng.uniform(-1, 1);
  return p;
}

Vec2 random_ref_point(SplitMix64& rng) {
  for (;;) {
    const Vec2 x(rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (x.x() + x.y() <= 0) return x;
  }
}

struct Case {
  TriMesh mesh;
  std::unique_ptr<Circle> circle;
  Method method;
  int P;
};

Case random_case(SplitMix64& rng, bool cbm_only = false) {
  Case c;
  const double lc = rng.uniform(0.15, 0.3);
  MesherOptions o;
  o.seed = rng.next();
  const int pick = cbm_only ? 0 : static_cast<int>(rng.next() % 4);
  c.method = static_cast<Method>(pick);
  c.P = 1 + static_cast<int>(rng.next() % 4);
  if (c.method == Method::cbm) {
    c.mesh = mesh_disk(kC, rng.uniform(0.3, 0.45), lc, o);
  } else {
    c.mesh = mesh_rectangle(Vec2(0, 0), Vec2(1, 1), lc, o);
    c.circle = std::make_unique<Circle>(Vec2(rng.uniform(0.45, 0.55), rng.uniform(0.45, 0.55)), rng.uniform(0.3, 0.4));
  }
  return c;
}

BoundaryProblem random_problem(SplitMix64& rng, WeakForm f) {
  const BcKind bc = static_cast<BcKind>(rng.next() % 3);
  BoundaryProblem p = mms_problem(Manufactured::preset("canonical"), bc, bc == BcKind::dirichlet ? 0.0 : 1.0,
                                  std::pow(10.0, rng.uniform(-3, 3)));
  p.form = f;
  p.robin = f == WeakForm::aubin ? RobinVariant::aubin : RobinVariant::nitsche_full_condition;
  return p;
}

} // namespace

TEST_SUITE("properties") {

TEST_CASE("cardinality and partition of unity") {
  SplitMix64 rng(101);
  int n = 0;
  for (; n < kCases; ++n) {
    const int P = 1 + static_cast<int>(rng.next() % 12);
    const ReferenceElement ref(P);
    const int k = static_cast<int>(rng.next() % ref.size());
    std::vector<double> h(ref.size());
    ref.lagrange(Vec2(ref.nodes()(k, 0), ref.nodes()(k, 1)), h.data());
    double err = 0;
    for (int i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(h[i] - (i == k)));
    CHECK(err < 1e-11);
    ref.lagrange(random_ref_point(rng), h.data());
    double s = 0;
    for (double v : h) s += v;
    CHECK(std::abs(s - 1) < 1e-11);
  }
  CHECK(n >= 100);
}

TEST_CASE("derivative exactness for polynomials of degree <= P") {
  SplitMix64 rng(202);
  int n = 0;
  for (; n < kCases; ++n) {
    const int P = 1 + static_cast<int>(rng.next() % 10);
    const ReferenceElement ref(P);
    const Poly p = random_poly(rng, P);
    const int np = ref.size();
    Vec u(np);
    for (int i = 0; i < np; ++i) u(i) = p(Vec2(ref.nodes()(i, 0), ref.nodes()(i, 1)));
    // nodal differentiation matrices
    const Vec ur = ref.Dr() * u, us = ref.Ds() * u;
    double err = 0, scale = 1;
    for (int i = 0; i < np; ++i) {
      const Vec2 g = p.grad(Vec2(ref.nodes()(i, 0), ref.nodes()(i, 1)));
      scale = std::max(scale, g.norm());
      err = std::max(err, std::max(std::abs(ur(i) - g.x()), std::abs(us(i) - g.y())));
    }
    CHECK(err < 1e-10 * scale);
    // basis gradients off the nodes, including slightly outside the element
    const Vec2 x = random_ref_point(rng) * rng.uniform(0.8, 1.2);
    std::vector<double> hr(np), hs(np);
    ref.lagrange_gradient(x, hr.data(), hs.data());
    double gr = 0, gs = 0;
    for (int i = 0; i < np; ++i) {
      gr += hr[i] * u(i);
      gs += hs[i] * u(i);
    }
    const Vec2 g = p.grad(x);
    CHECK(std::abs(gr - g.x()) < 1e-9 * (1 + g.norm()));
    CHECK(std::abs(gs - g.y()) < 1e-9 * (1 + g.norm()));
  }
  CHECK(n >= 100);
}

TEST_CASE("symmetric Nitsche gives a symmetric matrix") {
  SplitMix64 rng(303);
  int n = 0;
  for (; n < kCases; ++n) {
    const Case c = random_case(rng, true);
    BoundaryProblem p = mms_problem(Manufactured::preset("canonical"), BcKind::dirichlet, rng.uniform(0, 2));
    p.form = WeakForm::nitsche;
    p.c_gamma = rng.uniform(0.05, 1.0);
    const AssembledSystem s = assemble(build_surrogate(c.mesh, nullptr, Method::cbm, c.P), ReferenceElement(c.P), p);
    const Mat A = Mat(s.A);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * A.cwiseAbs().maxCoeff());
    // the symmetric SBM Dirichlet variant with zero mapping distance is symmetric too
    if (n % 4 == 0) {
      const Circle circ(kC, 0.375);
      const TriMesh bg = mesh_rectangle(Vec2(0, 0), Vec2(1, 1), 0.2);
      const Method m = static_cast<Method>(1 + n / 4 % 3);
      const SurrogateDomain z = with_zero_distance(build_surrogate(bg, &circ, m, c.P), m);
      p.dirichlet = DirichletVariant::symmetric;
      const Mat B = Mat(assemble(z, ReferenceElement(c.P), p).A);
      CHECK((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * B.cwiseAbs().maxCoeff());
    }
  }
  CHECK(n >= 100);
}

TEST_CASE("assembly is deterministic") {
  SplitMix64 rng(404);
  int n = 0;
  for (; n < kCases; ++n) {
    const std::uint64_t seed = rng.next();
    SplitMix64 a(seed), b(seed);
    const Case ca = random_case(a), cb = random_case(b);
    CHECK(ca.mesh == cb.mesh);
    const WeakForm f = n % 2 ? WeakForm::nitsche : WeakForm::aubin;
    const BoundaryProblem pa = random_problem(a, f), pb = random_problem(b, f);
    const SurrogateDomain da = build_surrogate(ca.mesh, ca.circle.get(), ca.method, ca.P);
    const SurrogateDomain db = build_surrogate(cb.mesh, cb.circle.get(), cb.method, cb.P);
    const AssembledSystem sa = assemble(da, ReferenceElement(ca.P), pa);
    const AssembledSystem sb = assemble(db, ReferenceElement(cb.P), pb);
    CHECK(Mat(sa.A) == Mat(sb.A));
    CHECK(sa.b == sb.b);
  }
  CHECK(n >= 100);
}

TEST_CASE("assembly does not depend on the thread count") {
  SplitMix64 rng(505);
  int n = 0;
  for (; n < kCases; ++n) {
    const Case c = random_case(rng);
    const BoundaryProblem p = random_problem(rng, n % 2 ? WeakForm::nitsche : WeakForm::aubin);
    const SurrogateDomain d = build_surrogate(c.mesh, c.circle.get(), c.method, c.P);
    const ReferenceElement ref(c.P);
    AssemblyOptions o;
    o.threads = 1;
    const AssembledSystem s1 = assemble(d, ref, p, o);
    o.threads = 2 + static_cast<int>(rng.next() % 7);
    const AssembledSystem sn = assemble(d, ref, p, o);
    CHECK(Mat(s1.A) == Mat(sn.A));
    CHECK(s1.b == sn.b);
  }
  CHECK(n >= 100);
}

TEST_CASE("SIMD kernels agree with the scalar kernels") {
  if (!kernels::isa_available(kernels::Isa::avx2)) return;
#ifdef SBM_HAVE_AVX2_KERNELS
  SplitMix64 rng(606);
  auto fill = [&](std::vector<double>& v) {
    for (double& x : v) x = rng.uniform(-1, 1);
  };
  auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
    double err = 0, s = 1e-300;
    for (size_t i = 0; i < a.size(); ++i) {
      err = std::max(err, std::abs(a[i] - b[i]));
      s = std::max(s, std::abs(a[i]));
    }
    return err <= 1e-12 * s;
  };
  int n = 0;
  for (; n < kCases; ++n) {
    const size_t len = 1 + rng.next() % 70, m = 1 + rng.next() % 40, k = 1 + rng.next() % 40;
    std::vector<double> x(len), y(len);
    fill(x);
    fill(y);
    std::vector<double> y1 = y, y2 = y;
    kernels::scalar::axpy(len, 0.7, x.data(), y1.data());
    kernels::avx2::axpy(len, 0.7, x.data(), y2.data());
    CHECK(close(y1, y2));
    CHECK(std::abs(kernels::scalar::dot(len, x.data(), y.data()) - kernels::avx2::dot(len, x.data(), y.data())) <
          1e-12 * len);
    std::vector<double> w(m), A(m * k), B(m * k), o1(k * k), o2;
    fill(w);
    fill(A);
    fill(B);
    fill(o1);
    o2 = o1;
    kernels::scalar::weighted_gram(m, k, w.data(), A.data(), B.data(), o1.data());
    kernels::avx2::weighted_gram(m, k, w.data(), A.data(), B.data(), o2.data());
    CHECK(close(o1, o2));
    std::vector<double> xm(m), yk(k), q1(m * k), q2;
    fill(xm);
    fill(yk);
    fill(q1);
    q2 = q1;
    kernels::scalar::outer_add(m, k, -1.3, xm.data(), yk.data(), q1.data());
    kernels::avx2::outer_add(m, k, -1.3, xm.data(), yk.data(), q2.data());
    CHECK(close(q1, q2));
    std::vector<double> X(m * k), M(k * len), r1(m), r2(m);
    fill(X);
    fill(M);
    kernels::scalar::abs_row_sums(m, k, len, X.data(), M.data(), r1.data());
    kernels::avx2::abs_row_sums(m, k, len, X.data(), M.data(), r2.data());
    CHECK(close(r1, r2));
  }
  CHECK(n >= 100);
#endif
}

}
