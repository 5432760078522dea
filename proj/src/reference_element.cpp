#include "sbm/reference_element.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbm/kernels.hpp"

namespace sbm {

namespace {

// normalized P_0..P_N^{(a,b)}(x)
double jacobi_norm(double a, double b) {
  const int ia = static_cast<int>(a), ib = static_cast<int>(b);
  if (ia == a && ib == b && ia >= 0 && ib >= 0) {
    // 2^{a+b+1}/(a+b+1) a! b! / (a+b)!
    double g = std::ldexp(1.0, ia + ib + 1) / (ia + ib + 1);
    for (int k = 1; k <= ib; ++k) g *= static_cast<double>(k) / (ia + k);
    return g;
  }
  return std::pow(2.0, a + b + 1) / (a + b + 1) * std::tgamma(a + 1) * std::tgamma(b + 1) /
         std::tgamma(a + b + 1);
}

void jacobi_seq(double x, double a, double b, int N, double* p) {
  const double g0 = jacobi_norm(a, b);
  p[0] = 1.0 / std::sqrt(g0);
  if (N == 0) return;
  const double g1 = (a + 1) * (b + 1) / (a + b + 3) * g0;
  p[1] = ((a + b + 2) * x / 2 + (a - b) / 2) / std::sqrt(g1);
  double aold = 2 / (2 + a + b) * std::sqrt((a + 1) * (b + 1) / (a + b + 3));
  for (int i = 1; i < N; ++i) {
    const double h1 = 2 * i + a + b;
    const double anew = 2 / (h1 + 2) *
                        std::sqrt((i + 1) * (i + 1 + a + b) * (i + 1 + a) * (i + 1 + b) /
                                  (h1 + 1) / (h1 + 3));
    const double bnew = -(a * a - b * b) / h1 / (h1 + 2);
    p[i + 1] = (-aold * p[i - 1] + (x - bnew) * p[i]) / anew;
    aold = anew;
  }
}

} // namespace

double jacobi_p(double x, double a, double b, int n) {
  require(n >= 0 && n <= 4 * kMaxOrder, "jacobi_p: bad degree");
  std::vector<double> p(n + 1);
  jacobi_seq(x, a, b, n, p.data());
  return p[n];
}

double grad_jacobi_p(double x, double a, double b, int n) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + a + b + 1)) * jacobi_p(x, a + 1, b + 1, n - 1);
}

Rule1D gauss_jacobi(int npts, double a, double b) {
  require(npts >= 1, "gauss_jacobi: need at least one point");
  Rule1D q;
  const int N = npts - 1;
  const double scale = std::pow(2.0, a + b + 1) / (a + b + 1) * std::tgamma(a + 1) *
                       std::tgamma(b + 1) / std::tgamma(a + b + 1);
  if (N == 0) {
    q.x = {-(a - b) / (a + b + 2)};
    q.w = {scale};
    return q;
  }
  Mat J = Mat::Zero(npts, npts);
  for (int i = 0; i <= N; ++i) {
    const double h1 = 2 * i + a + b;
    J(i, i) = (a + b < 1e-15 && i == 0) ? 0.0 : -(a * a - b * b) / (h1 + 2) / h1;
    if (i < N) {
      const double k = i + 1;
      const double off = 2 / (h1 + 2) *
                         std::sqrt(k * (k + a + b) * (k + a) * (k + b) / (h1 + 1) / (h1 + 3));
      J(i, i + 1) = J(i + 1, i) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  q.x.resize(npts);
  q.w.resize(npts);
  for (int i = 0; i < npts; ++i) {
    q.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    q.w[i] = v0 * v0 * scale;
  }
  return q;
}

std::vector<double> gauss_lobatto_nodes(int P) {
  require(P >= 1, "gauss_lobatto_nodes: order must be >= 1");
  std::vector<double> x{-1.0};
  if (P >= 2) {
    Rule1D in = gauss_jacobi(P - 1, 1.0, 1.0);
    x.insert(x.end(), in.x.begin(), in.x.end());
  }
  x.push_back(1.0);
  return x;
}

// psi_ij = sqrt(2) Phat_i(a) Phat_j^{(2i+1,0)}(s) (1-s)^i with a = X/t, X = (1+2r+s)/2,
// t = (1-s)/2.  t^i P_i(X/t) is generated by the scaled Legendre recurrence, no division.
void modal_basis(int P, double r, double s, double* psi) {
  double Q[kMaxOrder + 2];
  double J[kMaxOrder + 2];
  const double X = 0.5 * (1 + 2 * r + s), t = 0.5 * (1 - s), t2 = t * t;
  Q[0] = 1.0;
  if (P >= 1) Q[1] = X;
  for (int n = 1; n < P; ++n) Q[n + 1] = ((2 * n + 1) * X * Q[n] - n * t2 * Q[n - 1]) / (n + 1);
  int sk = 0;
  double pow2 = 1.0;
  for (int i = 0; i <= P; ++i) {
    jacobi_seq(s, 2 * i + 1, 0, P - i, J);
    const double c = std::sqrt(2.0) * std::sqrt((2 * i + 1) / 2.0) * pow2 * Q[i];
    for (int j = 0; j <= P - i; ++j) psi[sk++] = c * J[j];
    pow2 *= 2.0;
  }
}

void modal_gradient(int P, double r, double s, double* dr, double* ds) {
  double Q[kMaxOrder + 2], Qr[kMaxOrder + 2], Qs[kMaxOrder + 2];
  double J[kMaxOrder + 2], Jd[kMaxOrder + 2];
  const double X = 0.5 * (1 + 2 * r + s), t = 0.5 * (1 - s), t2 = t * t;
  // d/dr: X' = 1, (t^2)' = 0;  d/ds: X' = 1/2, (t^2)' = -t
  Q[0] = 1.0;
  Qr[0] = 0.0;
  Qs[0] = 0.0;
  if (P >= 1) {
    Q[1] = X;
    Qr[1] = 1.0;
    Qs[1] = 0.5;
  }
  for (int n = 1; n < P; ++n) {
    Q[n + 1] = ((2 * n + 1) * X * Q[n] - n * t2 * Q[n - 1]) / (n + 1);
    Qr[n + 1] = ((2 * n + 1) * (Q[n] + X * Qr[n]) - n * t2 * Qr[n - 1]) / (n + 1);
    Qs[n + 1] = ((2 * n + 1) * (0.5 * Q[n] + X * Qs[n]) - n * (-t * Q[n - 1] + t2 * Qs[n - 1])) /
                (n + 1);
  }
  int sk = 0;
  double pow2 = 1.0;
  for (int i = 0; i <= P; ++i) {
    const int nj = P - i;
    jacobi_seq(s, 2 * i + 1, 0, nj, J);
    Jd[0] = 0.0;
    if (nj >= 1) {
      jacobi_seq(s, 2 * i + 2, 1, nj - 1, Jd + 1);
      for (int j = 1; j <= nj; ++j) Jd[j] *= std::sqrt(j * (j + 2.0 * i + 2));
    }
    const double c = std::sqrt(2.0) * std::sqrt((2 * i + 1) / 2.0) * pow2;
    for (int j = 0; j <= nj; ++j) {
      dr[sk] = c * Qr[i] * J[j];
      ds[sk] = c * (Qs[i] * J[j] + Q[i] * Jd[j]);
      ++sk;
    }
    pow2 *= 2.0;
  }
}

namespace {

const double kAlphaOpt[] = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832,
                            1.3648, 1.4773, 1.4959, 1.5743, 1.5770, 1.6223, 1.6258};

Vec warp_factor(int P, const Vec& rout) {
  std::vector<double> lgl = gauss_lobatto_nodes(P);
  Mat Veq(P + 1, P + 1);
  Vec req(P + 1);
  for (int i = 0; i <= P; ++i) req(i) = -1.0 + 2.0 * i / P;
  std::vector<double> pj(P + 1);
  for (int i = 0; i <= P; ++i) {
    jacobi_seq(req(i), 0, 0, P, pj.data());
    for (int j = 0; j <= P; ++j) Veq(i, j) = pj[j];
  }
  Mat Pmat(P + 1, rout.size());
  for (Eigen::Index k = 0; k < rout.size(); ++k) {
    jacobi_seq(rout(k), 0, 0, P, pj.data());
    for (int j = 0; j <= P; ++j) Pmat(j, k) = pj[j];
  }
  Mat L = Veq.transpose().fullPivLu().solve(Pmat);
  Vec d(P + 1);
  for (int i = 0; i <= P; ++i) d(i) = lgl[i] - req(i);
  Vec warp = L.transpose() * d;
  for (Eigen::Index k = 0; k < rout.size(); ++k) {
    const bool inside = std::abs(rout(k)) < 1.0 - 1e-10;
    if (inside) warp(k) /= 1.0 - rout(k) * rout(k);
    else warp(k) = 0.0;
  }
  return warp;
}

} // namespace

Mat warp_blend_nodes(int P) {
  require(P >= 1 && P <= kMaxOrder, "warp_blend_nodes: order out of range");
  const double alpha = P < 16 ? kAlphaOpt[P - 1] : 5.0 / 3.0;
  const int np = num_nodes(P);
  Vec L1(np), L2(np), L3(np);
  int sk = 0;
  for (int n = 1; n <= P + 1; ++n)
    for (int m = 1; m <= P + 2 - n; ++m) {
      L1(sk) = (n - 1.0) / P;
      L3(sk) = (m - 1.0) / P;
      ++sk;
    }
  L2 = Vec::Ones(np) - L1 - L3;
  Vec x = -L2 + L3;
  Vec y = (-L2 - L3 + 2 * L1) / std::sqrt(3.0);
  Vec b1 = 4 * L2.cwiseProduct(L3), b2 = 4 * L1.cwiseProduct(L3), b3 = 4 * L1.cwiseProduct(L2);
  Vec w1 = warp_factor(P, L3 - L2), w2 = warp_factor(P, L1 - L3), w3 = warp_factor(P, L2 - L1);
  Mat out(np, 2);
  for (int i = 0; i < np; ++i) {
    const double a1 = b1(i) * w1(i) * (1 + std::pow(alpha * L1(i), 2));
    const double a2 = b2(i) * w2(i) * (1 + std::pow(alpha * L2(i), 2));
    const double a3 = b3(i) * w3(i) * (1 + std::pow(alpha * L3(i), 2));
    const double X = x(i) + a1 + std::cos(2 * M_PI / 3) * a2 + std::cos(4 * M_PI / 3) * a3;
    const double Y = y(i) + std::sin(2 * M_PI / 3) * a2 + std::sin(4 * M_PI / 3) * a3;
    // equilateral -> reference
    const double l1 = (std::sqrt(3.0) * Y + 1) / 3;
    const double l2 = (-3 * X - std::sqrt(3.0) * Y + 2) / 6;
    const double l3 = (3 * X - std::sqrt(3.0) * Y + 2) / 6;
    out(i, 0) = -l2 + l3 - l1;
    out(i, 1) = -l2 - l3 + l1;
  }
  return out;
}

TriRule triangle_rule(int n) {
  Rule1D ga = gauss_legendre(n);
  Rule1D gb = gauss_jacobi(n, 1.0, 0.0);
  TriRule t;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double a = ga.x[i], b = gb.x[j];
      t.pts.emplace_back(0.5 * (1 + a) * (1 - b) - 1, b);
      t.w.push_back(0.5 * ga.w[i] * gb.w[j]);
    }
  return t;
}

ReferenceElement::ReferenceElement(int P) : P_(P), np_(num_nodes(P)) {
  require(P >= 1 && P <= kMaxOrder, "ReferenceElement: order out of range");
  nodes_ = warp_blend_nodes(P);
  V_.resize(np_, np_);
  Mat Vr(np_, np_), Vs(np_, np_);
  std::vector<double> psi(np_), dr(np_), ds(np_);
  for (int i = 0; i < np_; ++i) {
    modal_basis(P, nodes_(i, 0), nodes_(i, 1), psi.data());
    modal_gradient(P, nodes_(i, 0), nodes_(i, 1), dr.data(), ds.data());
    for (int j = 0; j < np_; ++j) {
      V_(i, j) = psi[j];
      Vr(i, j) = dr[j];
      Vs(i, j) = ds[j];
    }
  }
  Vinv_ = V_.inverse();
  Dr_ = Vr * Vinv_;
  Ds_ = Vs * Vinv_;
  vinvT_ = Vinv_;

  const double tol = 1e-10;
  for (int i = 0; i < np_; ++i) {
    const double r = nodes_(i, 0), s = nodes_(i, 1);
    if (std::abs(s + 1) < tol) edge_nodes_[0].push_back(i);
    if (std::abs(r + s) < tol) edge_nodes_[1].push_back(i);
    if (std::abs(r + 1) < tol) edge_nodes_[2].push_back(i);
  }
  // order each edge list from its first vertex to its second
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = ref_vertex(k);
    std::sort(edge_nodes_[k].begin(), edge_nodes_[k].end(), [&](int p, int q) {
      return (nodes_.row(p).transpose() - a).norm() < (nodes_.row(q).transpose() - a).norm();
    });
  }
  for (int k = 0; k < 3; ++k) vertex_nodes_.push_back(edge_nodes_[k].front());

  cub_ = triangle_rule(P + 2);
  edge_ = gauss_legendre(P + 2);
  const int nq = static_cast<int>(cub_.w.size());
  cphi_.resize(nq, np_);
  cdr_.resize(nq, np_);
  cds_.resize(nq, np_);
  for (int q = 0; q < nq; ++q) {
    lagrange(cub_.pts[q], cphi_.row(q).data());
    lagrange_gradient(cub_.pts[q], cdr_.row(q).data(), cds_.row(q).data());
  }
}

void ReferenceElement::lagrange(const Vec2& rs, double* h) const {
  double psi[num_nodes(kMaxOrder)];
  modal_basis(P_, rs.x(), rs.y(), psi);
  std::fill(h, h + np_, 0.0);
  for (int m = 0; m < np_; ++m) kernels::axpy(np_, psi[m], vinvT_.row(m).data(), h);
}

void ReferenceElement::lagrange_gradient(const Vec2& rs, double* hr, double* hs) const {
  double dr[num_nodes(kMaxOrder)], ds[num_nodes(kMaxOrder)];
  modal_gradient(P_, rs.x(), rs.y(), dr, ds);
  std::fill(hr, hr + np_, 0.0);
  std::fill(hs, hs + np_, 0.0);
  for (int m = 0; m < np_; ++m) {
    kernels::axpy(np_, dr[m], vinvT_.row(m).data(), hr);
    kernels::axpy(np_, ds[m], vinvT_.row(m).data(), hs);
  }
}

namespace {

class LebesgueSampler {
public:
  explicit LebesgueSampler(const ReferenceElement& ref)
      : ref_(ref), np_(ref.size()), minv_(ref.inv_vandermonde()) {}

  void push(double r, double s) {
    modal_basis(ref_.order(), r, s, buf_.data() + count_ * np_);
    if (++count_ == kBlock) flush();
  }

  double finish() {
    flush();
    return best_;
  }

  double at(double r, double s) {
    std::vector<double> psi(np_);
    double v = 0.0;
    modal_basis(ref_.order(), r, s, psi.data());
    kernels::abs_row_sums(1, np_, np_, psi.data(), minv_.data(), &v);
    return v;
  }

private:
  static constexpr int kBlock = 256;

  void flush() {
    if (count_ == 0) return;
    kernels::abs_row_sums(count_, np_, np_, buf_.data(), minv_.data(), rows_.data());
    for (int i = 0; i < count_; ++i) best_ = std::max(best_, rows_[i]);
    count_ = 0;
  }

  const ReferenceElement& ref_;
  int np_;
  RowMat minv_;
  std::vector<double> buf_ = std::vector<double>(kBlock * num_nodes(kMaxOrder));
  std::vector<double> rows_ = std::vector<double>(kBlock);
  int count_ = 0;
  double best_ = 0.0;
};

bool in_reference(double r, double s) { return r >= -1 && s >= -1 && r + s <= 0; }

} // namespace

double lebesgue_interpolation(const ReferenceElement& ref, const LebesgueOptions& opt) {
  LebesgueSampler smp(ref);
  const int n = static_cast<int>(std::lround(2.0 * opt.density));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i + j <= n; ++i) smp.push(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
  return smp.finish();
}

double lebesgue_extrapolation(const ReferenceElement& ref, const LebesgueOptions& opt) {
  LebesgueSampler smp(ref);
  const double R = opt.radius, hstep = 1.0 / opt.density;
  const int n = static_cast<int>(std::ceil(R / hstep));
  for (int j = -n; j <= n; ++j)
    for (int i = -n; i <= n; ++i) {
      const double dx = i * hstep, dy = j * hstep;
      if (dx * dx + dy * dy > R * R) continue;
      const double r = opt.center.x() + dx, s = opt.center.y() + dy;
      if (!in_reference(r, s)) smp.push(r, s);
    }
  // the rim carries the maximum, so sample it at the same density
  const int nrim = static_cast<int>(std::ceil(2 * M_PI * R * opt.density));
  for (int k = 0; k < nrim; ++k) {
    const double th = 2 * M_PI * k / nrim;
    smp.push(opt.center.x() + R * std::cos(th), opt.center.y() + R * std::sin(th));
  }
  return smp.finish();
}

std::vector<LebesgueRow> lebesgue_table(int pmin, int pmax, const LebesgueOptions& opt) {
  std::vector<LebesgueRow> rows;
  for (int P = pmin; P <= pmax; ++P) {
    ReferenceElement ref(P);
    rows.push_back({P, lebesgue_interpolation(ref, opt), lebesgue_extrapolation(ref, opt)});
  }
  return rows;
}

double shifted_vandermonde_condition(int P, double r_star) {
  std::vector<double> x = gauss_lobatto_nodes(P);
  const double moved = 1.0 + r_star;
  for (int i = 0; i < P; ++i)
    if (std::abs(moved - x[i]) < 1e-13) return std::numeric_limits<double>::infinity();
  x.back() = moved;
  Mat V(P + 1, P + 1);
  std::vector<double> p(P + 1);
  for (int i = 0; i <= P; ++i) {
    jacobi_seq(x[i], 0, 0, P, p.data());
    for (int j = 0; j <= P; ++j) V(i, j) = p[j];
  }
  Eigen::JacobiSVD<Mat> svd(V);
  const Vec& sv = svd.singularValues();
  if (sv(P) == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(P);
}

} // namespace sbm
