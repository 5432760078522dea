// independent reference computations used by the tests
#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "sbm/assembly.hpp"
#include "sbm/embedding.hpp"
#include "sbm/mesh.hpp"

namespace oracle {

using sbm::Mat;
using sbm::Vec;
using sbm::Vec2;

inline double sig3(double x) {
  if (x == 0) return 0;
  const int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double s = std::pow(10.0, 2 - e);
  return std::round(x * s) / s;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }
inline double binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// int over the reference triangle of r^a s^b, r = 2u-1, s = 2v-1 on the unit triangle
inline double ref_monomial_integral(int a, int b) {
  // integrate s^b over [-1, -r] first, then r
  auto I = [](int n) { return n % 2 ? 0.0 : 2.0 / (n + 1); };
  return (b % 2 ? 1.0 : -1.0) / (b + 1) * (I(a + b + 1) - I(a));
}

inline double legendre_derivative(int n, double x) {
  return n * (x * std::legendre(n, x) - std::legendre(n - 1, x)) / (x * x - 1);
}

inline double gll_vandermonde_condition(int P) {
  // nodes by Newton on (1-x^2) P_P'(x), started from Chebyshev-Gauss-Lobatto points
  std::vector<double> x(P + 1);
  for (int i = 0; i <= P; ++i) x[i] = -std::cos(M_PI * i / P);
  for (int i = 1; i < P; ++i) {
    double t = x[i];
    for (int it = 0; it < 100; ++it) {
      // q = P_P', q' via the Legendre ODE
      const double q = legendre_derivative(P, t);
      const double dq = (2 * t * q - P * (P + 1) * std::legendre(P, t)) / (1 - t * t);
      const double step = q / dq;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = t;
  }
  Mat V(P + 1, P + 1);
  for (int i = 0; i <= P; ++i)
    for (int j = 0; j <= P; ++j) V(i, j) = std::sqrt((2 * j + 1) / 2.0) * std::legendre(j, x[i]);
  Eigen::JacobiSVD<Mat> svd(V);
  return svd.singularValues()(0) / svd.singularValues()(P);
}

// Lagrange basis of the nodes evaluated at x through a monomial fit
inline std::vector<double> monomial_lagrange(const Mat& nodes, int P, const Vec2& x) {
  const int np = static_cast<int>(nodes.rows());
  auto row = [&](double r, double s) {
    Eigen::RowVectorXd m(np);
    int k = 0;
    for (int a = 0; a <= P; ++a)
      for (int b = 0; a + b <= P; ++b) m(k++) = std::pow(r, a) * std::pow(s, b);
    return m;
  };
  Mat M(np, np);
  for (int i = 0; i < np; ++i) M.row(i) = row(nodes(i, 0), nodes(i, 1));
  // h(x) = m(x) M^{-1}
  const Eigen::RowVectorXd h = M.transpose().colPivHouseholderQr().solve(row(x.x(), x.y()).transpose()).transpose();
  return std::vector<double>(h.data(), h.data() + np);
}

// active elements of a domain as a stand-alone mesh
inline sbm::TriMesh submesh(const sbm::SurrogateDomain& dom) {
  const auto& m = *dom.mesh;
  std::map<int, int> renum;
  std::vector<Vec2> v;
  std::vector<std::array<int, 3>> t;
  for (int e : dom.active_elements) {
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      const int g = m.triangles()[e][k];
      auto it = renum.find(g);
      if (it == renum.end()) {
        it = renum.emplace(g, static_cast<int>(v.size())).first;
        v.push_back(m.vertices()[g]);
      }
      tri[k] = it->second;
    }
    t.push_back(tri);
  }
  return sbm::TriMesh(v, t);
}

// perm[i] = dof of b at the position of dof i of a
inline std::vector<int> match_dofs(const sbm::DofMap& a, const sbm::DofMap& b, double tol = 1e-9) {
  std::vector<int> perm(a.ndof, -1);
  for (int i = 0; i < a.ndof; ++i)
    for (int j = 0; j < b.ndof; ++j)
      if ((a.coords[i] - b.coords[j]).norm() < tol) {
        perm[i] = j;
        break;
      }
  return perm;
}

// max |A_a - P A_b P^T| / max |A_a|, and the same for b
struct SystemDiff {
  double matrix = 0, rhs = 0;
  bool matched = true;
};
inline SystemDiff compare(const sbm::AssembledSystem& a, const sbm::AssembledSystem& b) {
  SystemDiff d;
  if (a.dofs.ndof != b.dofs.ndof) {
    d.matched = false;
    return d;
  }
  const auto perm = match_dofs(a.dofs, b.dofs);
  for (int p : perm)
    if (p < 0) d.matched = false;
  if (!d.matched) return d;
  const Mat A = Mat(a.A), B = Mat(b.A);
  const double scale = A.cwiseAbs().maxCoeff();
  const double bscale = std::max(a.b.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < a.dofs.ndof; ++i) {
    d.rhs = std::max(d.rhs, std::abs(a.b(i) - b.b(perm[i])) / bscale);
    for (int j = 0; j < a.dofs.ndof; ++j) d.matrix = std::max(d.matrix, std::abs(A(i, j) - B(perm[i], perm[j])) / scale);
  }
  return d;
}

// P1 Dirichlet system with the boundary trace u(x) ~ u(xbar) + grad u . d written out from
// barycentric hat functions; dense, one unknown per mesh vertex of the active set
struct TaylorSystem {
  Mat A;
  std::vector<Vec2> coords;
};
inline TaylorSystem taylor_p1_dirichlet(const sbm::SurrogateDomain& dom, double alpha, double gamma, bool nitsche) {
  const auto& m = *dom.mesh;
  std::map<int, int> id;
  TaylorSystem s;
  for (int e : dom.active_elements)
    for (int v : m.triangles()[e])
      if (!id.count(v)) {
        id[v] = static_cast<int>(s.coords.size());
        s.coords.push_back(m.vertices()[v]);
      }
  const int n = static_cast<int>(s.coords.size());
  s.A = Mat::Zero(n, n);
  struct Hat {
    Eigen::Matrix3d coef;  // lambda_i(x) = c0 + c1 x + c2 y
    double area;
  };
  auto hat = [&](int e) {
    Eigen::Matrix3d M;
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = m.vertices()[m.triangles()[e][k]];
      M.row(k) << 1, p.x(), p.y();
    }
    Hat h;
    h.coef = M.inverse().transpose();  // row i: coefficients of lambda_i
    h.area = 0.5 * std::abs(M.determinant());
    return h;
  };
  for (int e : dom.active_elements) {
    const Hat h = hat(e);
    const auto& tri = m.triangles()[e];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Vec2 gi(h.coef(i, 1), h.coef(i, 2)), gj(h.coef(j, 1), h.coef(j, 2));
        s.A(id[tri[i]], id[tri[j]]) += h.area * gi.dot(gj) + alpha * h.area * (i == j ? 2.0 : 1.0) / 12.0;
      }
  }
  for (const auto& se : dom.edges) {
    const Hat h = hat(se.element);
    const auto& tri = m.triangles()[se.element];
    for (const auto& bp : se.qp) {
      double vb[3], vx[3], gb[3];
      for (int i = 0; i < 3; ++i) {
        const Vec2 g(h.coef(i, 1), h.coef(i, 2));
        vb[i] = h.coef(i, 0) + g.dot(bp.xbar);
        vx[i] = vb[i] + g.dot(bp.d);
        gb[i] = g.dot(se.nbar);
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double a = vb[i] * vx[j] / gamma - vb[i] * gb[j];
          if (nitsche) a -= gb[i] * vx[j];
          s.A(id[tri[i]], id[tri[j]]) += bp.w * a;
        }
    }
  }
  return s;
}

} // namespace oracle
