#include "sbm/mms.hpp"

#include <cmath>
#include <map>
#include <memory>

#include "sbm/linear_solver.hpp"

namespace sbm {

Manufactured Manufactured::preset(const std::string& name, double Lx, double Ly) {
  if (name == "final" || name == "canonical") return {Lx, Ly, 5.0};
  if (name == "draft") return {Lx, Ly, 1.0};
  throw Error("unknown manufactured solution preset '" + name + "'");
}

double Manufactured::u(const Vec2& x) const {
  return std::cos(k * M_PI * x.x() / Lx) * std::sin(k * M_PI * x.y() / Ly) + 2 * x.x() - x.y();
}

Vec2 Manufactured::grad(const Vec2& x) const {
  const double ax = k * M_PI / Lx, ay = k * M_PI / Ly;
  return Vec2(-ax * std::sin(ax * x.x()) * std::sin(ay * x.y()) + 2,
              ay * std::cos(ax * x.x()) * std::cos(ay * x.y()) - 1);
}

double Manufactured::laplacian(const Vec2& x) const {
  const double ax = k * M_PI / Lx, ay = k * M_PI / Ly;
  return -(ax * ax + ay * ay) * std::cos(ax * x.x()) * std::sin(ay * x.y());
}

Vec interpolate(const DofMap& dofs, const Field& u) {
  Vec v(dofs.ndof);
  for (int i = 0; i < dofs.ndof; ++i) v(i) = u(dofs.coords[i]);
  return v;
}

namespace {

template <class F>
double integrate_abs(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
                     const Vec& uh, F&& exact) {
  const TriRule rule = triangle_rule(ref.order() + 4);
  const int np = ref.size();
  RowMat phi(rule.w.size(), np);
  for (size_t q = 0; q < rule.w.size(); ++q) ref.lagrange(rule.pts[q], phi.row(q).data());
  double total = 0.0;
  for (int e : dom.active_elements) {
    const AffineMap m = dom.mesh->affine(e);
    const int* g = dofs.element(e);
    Vec ue(np);
    for (int i = 0; i < np; ++i) ue(i) = uh(g[i]);
    for (size_t q = 0; q < rule.w.size(); ++q) {
      const double v = phi.row(q).dot(ue);
      total += rule.w[q] * m.detJ * std::abs(v - exact(m.to_physical(rule.pts[q])));
    }
  }
  return total;
}

} // namespace

double l1_error(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
                const Vec& uh, const Field& u) {
  return integrate_abs(dom, ref, dofs, uh, u);
}

double l1_norm(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
               const Vec& uh) {
  return integrate_abs(dom, ref, dofs, uh, [](const Vec2&) { return 0.0; });
}

double residual_l1(const AssembledSystem& sys, const Vec& uI) { return (sys.A * uI - sys.b).lpNorm<1>(); }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& err, int last) {
  const size_t k = std::min<size_t>(last, h.size());
  std::vector<double> a(h.end() - k, h.end()), b(err.end() - k, err.end());
  return fit_slope(a, b);
}

BoundaryProblem mms_problem(const Manufactured& mms, BcKind kind, double alpha, double eps) {
  BoundaryProblem p;
  p.alpha = alpha;
  p.f = [mms, alpha](const Vec2& x) { return mms.forcing(x, alpha); };
  SegmentCondition c;
  c.kind = kind;
  c.value = [mms](const Vec2& x, const Vec2&, int) { return mms.u(x); };
  c.flux = [mms](const Vec2& x, const Vec2& n, int) { return mms.grad(x).dot(n); };
  c.eps = [eps](const Vec2&) { return eps; };
  p.segments[0] = c;
  return p;
}

double boundary_value(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
                      const Vec& uh, const SurrogateEdge& se, const BoundaryPoint& bp) {
  (void)dom;
  const int np = ref.size();
  std::vector<double> h(np);
  ref.lagrange(bp.ref_x, h.data());
  const int* g = dofs.element(se.element);
  double v = 0.0;
  for (int i = 0; i < np; ++i) v += h[i] * uh(g[i]);
  return v;
}

double boundary_normal_derivative(const SurrogateDomain& dom, const ReferenceElement& ref,
                                  const DofMap& dofs, const Vec& uh, const SurrogateEdge& se,
                                  const BoundaryPoint& bp) {
  const int np = ref.size();
  std::vector<double> hr(np), hs(np);
  ref.lagrange_gradient(bp.ref_x, hr.data(), hs.data());
  const AffineMap m = dom.mesh->affine(se.element);
  const int* g = dofs.element(se.element);
  double ur = 0, us = 0;
  for (int i = 0; i < np; ++i) {
    ur += hr[i] * uh(g[i]);
    us += hs[i] * uh(g[i]);
  }
  const Vec2 grad = m.Jinv.transpose() * Vec2(ur, us);
  return grad.dot(bp.n);
}

namespace {

// boundary data sampled at the mapped points, looked up by exact coordinates
using PointTable = std::map<std::pair<double, double>, double>;

BoundaryField table_field(std::shared_ptr<PointTable> t) {
  return [t](const Vec2& x, const Vec2&, int) {
    auto it = t->find({x.x(), x.y()});
    if (it == t->end()) throw Error("cascade: boundary point not tabulated");
    return it->second;
  };
}

Vec solve_system(const SurrogateDomain& dom, const ReferenceElement& ref, const BoundaryProblem& p,
                 DofMap* dofs) {
  AssembledSystem sys = assemble(dom, ref, p);
  Vec u = solve(sys.A, sys.b);
  if (dofs) *dofs = sys.dofs;
  return u;
}

} // namespace

CascadeResult dirichlet_cascade(const SurrogateDomain& dom, const ReferenceElement& ref,
                                const BoundaryProblem& robin, int levels) {
  BoundaryProblem dp = robin;
  dp.form = robin.robin == RobinVariant::aubin ? WeakForm::aubin : WeakForm::nitsche;
  dp.dirichlet = DirichletVariant::symmetric;
  for (auto& [seg, c] : dp.segments) c.kind = BcKind::dirichlet;
  CascadeResult r;
  DofMap dofs;
  r.u0 = solve_system(dom, ref, dp, &dofs);
  Vec prev = r.u0;
  BoundaryProblem zp = dp;
  zp.f = [](const Vec2&) { return 0.0; };
  for (int level = 1; level < levels; ++level) {
    auto table = std::make_shared<PointTable>();
    for (const auto& se : dom.edges)
      for (const auto& bp : se.qp) {
        const double dn = boundary_normal_derivative(dom, ref, dofs, prev, se, bp);
        const double q = level == 1 ? robin.segments.at(bp.segment).flux(bp.x, bp.n, bp.segment) : 0.0;
        (*table)[{bp.x.x(), bp.x.y()}] = q - dn;
      }
    for (auto& [seg, c] : zp.segments) c.value = table_field(table);
    Vec u = solve_system(dom, ref, zp, nullptr);
    (level == 1 ? r.u1 : r.u2) = u;
    prev = u;
  }
  return r;
}

CascadeResult neumann_cascade(const SurrogateDomain& dom, const ReferenceElement& ref,
                              const BoundaryProblem& robin, int levels) {
  BoundaryProblem np_ = robin;
  np_.form = robin.robin == RobinVariant::aubin ? WeakForm::aubin : WeakForm::nitsche;
  np_.neumann = robin.robin == RobinVariant::aubin ? NeumannVariant::plain : NeumannVariant::with_symmetric_penalty;
  for (auto& [seg, c] : np_.segments) c.kind = BcKind::neumann;
  CascadeResult r;
  DofMap dofs;
  r.u0 = solve_system(dom, ref, np_, &dofs);
  Vec prev = r.u0;
  BoundaryProblem zp = np_;
  zp.f = [](const Vec2&) { return 0.0; };
  for (int level = 1; level < levels; ++level) {
    auto table = std::make_shared<PointTable>();
    for (const auto& se : dom.edges)
      for (const auto& bp : se.qp) {
        const double u = boundary_value(dom, ref, dofs, prev, se, bp);
        const double d = level == 1 ? robin.segments.at(bp.segment).value(bp.x, bp.n, bp.segment) : 0.0;
        (*table)[{bp.x.x(), bp.x.y()}] = d - u;
      }
    for (auto& [seg, c] : zp.segments) c.flux = table_field(table);
    Vec u = solve_system(dom, ref, zp, nullptr);
    (level == 1 ? r.u1 : r.u2) = u;
    prev = u;
  }
  return r;
}

} // namespace sbm
