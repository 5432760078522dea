#pragma once

#include <array>
#include <vector>

#include "sbm/types.hpp"

namespace sbm {

// orthonormal Jacobi polynomial P_n^{(a,b)} on [-1,1]
double jacobi_p(double x, double a, double b, int n);
double grad_jacobi_p(double x, double a, double b, int n);

struct Rule1D {
  std::vector<double> x, w;
};

Rule1D gauss_jacobi(int npts, double a, double b);
inline Rule1D gauss_legendre(int npts) { return gauss_jacobi(npts, 0.0, 0.0); }
std::vector<double> gauss_lobatto_nodes(int P);

constexpr int kMaxOrder = 24;
constexpr int num_nodes(int P) { return (P + 1) * (P + 2) / 2; }

// modal orthonormal basis on R = {r,s >= -1, r+s <= 0}; polynomial form, valid off R
void modal_basis(int P, double r, double s, double* psi);
void modal_gradient(int P, double r, double s, double* dr, double* ds);

Mat warp_blend_nodes(int P);

struct TriRule {
  std::vector<Vec2> pts;
  std::vector<double> w;
};

// collapsed Gauss-Jacobi product rule, exact for total degree 2n-1
TriRule triangle_rule(int n);

// vertices (-1,-1), (1,-1), (-1,1); edge k joins vertex k and k+1
inline Vec2 ref_vertex(int k) {
  static const std::array<Vec2, 3> v{Vec2(-1, -1), Vec2(1, -1), Vec2(-1, 1)};
  return v[k];
}

class ReferenceElement {
public:
  explicit ReferenceElement(int P);

  int order() const { return P_; }
  int size() const { return np_; }
  const Mat& nodes() const { return nodes_; }
  const Mat& vandermonde() const { return V_; }
  const Mat& inv_vandermonde() const { return Vinv_; }
  const Mat& Dr() const { return Dr_; }
  const Mat& Ds() const { return Ds_; }
  const std::vector<int>& edge_nodes(int k) const { return edge_nodes_[k]; }
  const std::vector<int>& vertex_nodes() const { return vertex_nodes_; }

  const TriRule& cubature() const { return cub_; }
  const Rule1D& edge_rule() const { return edge_; }
  // cubature values / reference gradients of the nodal basis, row per point
  const RowMat& cub_phi() const { return cphi_; }
  const RowMat& cub_dr() const { return cdr_; }
  const RowMat& cub_ds() const { return cds_; }

  void lagrange(const Vec2& rs, double* h) const;
  void lagrange_gradient(const Vec2& rs, double* hr, double* hs) const;

private:
  int P_, np_;
  Mat nodes_, V_, Vinv_, Dr_, Ds_;
  RowMat vinvT_;
  std::array<std::vector<int>, 3> edge_nodes_;
  std::vector<int> vertex_nodes_;
  TriRule cub_;
  Rule1D edge_;
  RowMat cphi_, cdr_, cds_;
};

struct LebesgueOptions {
  double density = 400.0;  // lattice points per unit length
  Vec2 center{-1.0 / 3.0, -1.0 / 3.0};
  double radius = 1.75;
};

double lebesgue_interpolation(const ReferenceElement& ref, const LebesgueOptions& opt = {});
double lebesgue_extrapolation(const ReferenceElement& ref, const LebesgueOptions& opt = {});

struct LebesgueRow {
  int P;
  double interp, extrap;
};
std::vector<LebesgueRow> lebesgue_table(int pmin, int pmax, const LebesgueOptions& opt = {});

// 2-norm condition of the 1D Legendre Vandermonde on GLL nodes with the right
// node moved to 1 + r_star; +inf when the moved node hits another node
double shifted_vandermonde_condition(int P, double r_star);

} // namespace sbm
