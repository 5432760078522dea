#pragma once

#include <string>
#include <vector>

#include "sbm/assembly.hpp"

namespace sbm {

// u = cos(k pi x / Lx) sin(k pi y / Ly) + 2x - y, k = 5 (k = 1 is the "draft" preset)
struct Manufactured {
  double Lx = 1.0, Ly = 1.0, k = 5.0;

  static Manufactured preset(const std::string& name, double Lx = 1.0, double Ly = 1.0);

  double u(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
  double laplacian(const Vec2& x) const;
  double forcing(const Vec2& x, double alpha) const { return -laplacian(x) + alpha * u(x); }
};

// nodal interpolant of a field on the dof coordinates
Vec interpolate(const DofMap& dofs, const Field& u);

// int over the active elements of |u_h - u|, with a rule a few orders above 2P
double l1_error(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
                const Vec& uh, const Field& u);
double l1_norm(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
               const Vec& uh);
// sum_i |(A u_I - b)_i|
double residual_l1(const AssembledSystem& sys, const Vec& uI);

// least-squares slope of log(y) against log(x)
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);
// slope over the last `last` points
double fit_rate(const std::vector<double>& h, const std::vector<double>& err, int last = 3);

// problem with one condition of kind `kind` on segment 0, data taken from the manufactured field
BoundaryProblem mms_problem(const Manufactured& mms, BcKind kind, double alpha, double eps = 0.0);

// asymptotic cascade for the Dirichlet-limit Robin problem: u0, u1, u2 solved as Dirichlet problems
struct CascadeResult {
  Vec u0, u1, u2;
};
CascadeResult dirichlet_cascade(const SurrogateDomain& dom, const ReferenceElement& ref,
                                const BoundaryProblem& robin, int levels = 3);
// dual cascade for the Neumann limit
CascadeResult neumann_cascade(const SurrogateDomain& dom, const ReferenceElement& ref,
                              const BoundaryProblem& robin, int levels = 3);

// grad(u_h)(x).n at a boundary point, from the owning element polynomial
double boundary_normal_derivative(const SurrogateDomain& dom, const ReferenceElement& ref,
                                  const DofMap& dofs, const Vec& uh, const SurrogateEdge& se,
                                  const BoundaryPoint& bp);
double boundary_value(const SurrogateDomain& dom, const ReferenceElement& ref, const DofMap& dofs,
                      const Vec& uh, const SurrogateEdge& se, const BoundaryPoint& bp);

} // namespace sbm
