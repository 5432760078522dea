#include "sbm/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <thread>
#include <unordered_map>

#include "sbm/kernels.hpp"

namespace sbm {

namespace {

struct CellHash {
  size_t operator()(const std::pair<long long, long long>& k) const {
    return std::hash<long long>()(k.first * 0x9e3779b97f4a7c15LL ^ k.second);
  }
};

} // namespace

DofMap build_dofs(const SurrogateDomain& dom, const ReferenceElement& ref) {
  const TriMesh& mesh = *dom.mesh;
  const int np = ref.size();
  const double tol = 1e-10 * dom.stats.h_min;
  const double cell = 1e-8 * dom.stats.h_min;
  DofMap dm;
  dm.offset.assign(mesh.num_triangles(), -1);
  std::unordered_map<std::pair<long long, long long>, std::vector<int>, CellHash> grid;
  for (int e : dom.active_elements) {
    dm.offset[e] = static_cast<int>(dm.local_to_global.size());
    const AffineMap m = mesh.affine(e);
    for (int i = 0; i < np; ++i) {
      const Vec2 x = m.to_physical(ref.nodes().row(i).transpose());
      const long long cx = static_cast<long long>(std::floor(x.x() / cell));
      const long long cy = static_cast<long long>(std::floor(x.y() / cell));
      int found = -1;
      for (long long dx = -1; dx <= 1 && found < 0; ++dx)
        for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
          auto it = grid.find({cx + dx, cy + dy});
          if (it == grid.end()) continue;
          for (int g : it->second)
            if ((dm.coords[g] - x).norm() <= tol) {
              found = g;
              break;
            }
        }
      if (found < 0) {
        found = dm.ndof++;
        dm.coords.push_back(x);
        grid[{cx, cy}].push_back(found);
      }
      dm.local_to_global.push_back(found);
    }
  }
  return dm;
}

void BoundaryProblem::validate(const SurrogateDomain& dom) const {
  std::set<int> missing;
  std::vector<int> edges;
  for (size_t i = 0; i < dom.edges.size(); ++i)
    for (const auto& bp : dom.edges[i].qp)
      if (!segments.count(bp.segment)) {
        missing.insert(bp.segment);
        if (edges.empty() || edges.back() != static_cast<int>(i)) edges.push_back(static_cast<int>(i));
      }
  if (!missing.empty()) {
    std::string msg = "boundary problem: untagged boundary edges";
    for (size_t i = 0; i < edges.size() && i < 20; ++i) msg += " " + std::to_string(edges[i]);
    throw Error(msg);
  }
  for (const auto& [seg, c] : segments) {
    if (c.kind != BcKind::neumann) require(static_cast<bool>(c.value), "boundary problem: missing value data");
    if (c.kind != BcKind::dirichlet) require(static_cast<bool>(c.flux), "boundary problem: missing flux data");
    if (c.kind == BcKind::robin) require(static_cast<bool>(c.eps), "boundary problem: missing Robin eps");
  }
  require(static_cast<bool>(f), "boundary problem: missing forcing");
}

double gamma_of(const BoundaryProblem& prob, const SurrogateDomain& dom, int element) {
  const double h = prob.gamma_scaling == GammaScaling::avg ? dom.stats.h_avg : dom.mesh->element_h(element);
  return prob.c_gamma * std::pow(h, prob.gamma_power);
}

void compute_traces(const TriMesh& mesh, const ReferenceElement& ref, const SurrogateEdge& se,
                    const BoundaryPoint& bp, Traces& tr) {
  const int np = ref.size();
  const AffineMap m = mesh.affine(se.element);
  tr.vb.resize(np);
  tr.gb.resize(np);
  tr.vx.resize(np);
  tr.gx.resize(np);
  std::vector<double> hr(np), hs(np);
  auto grad_dot = [&](const Vec2& n, double* out) {
    // grad_x = J^{-T} grad_rs
    const double ar = m.Jinv(0, 0) * n.x() + m.Jinv(0, 1) * n.y();
    const double as = m.Jinv(1, 0) * n.x() + m.Jinv(1, 1) * n.y();
    for (int i = 0; i < np; ++i) out[i] = ar * hr[i] + as * hs[i];
  };
  ref.lagrange(bp.ref_xbar, tr.vb.data());
  ref.lagrange_gradient(bp.ref_xbar, hr.data(), hs.data());
  grad_dot(se.nbar, tr.gb.data());
  ref.lagrange(bp.ref_x, tr.vx.data());
  ref.lagrange_gradient(bp.ref_x, hr.data(), hs.data());
  grad_dot(bp.n, tr.gx.data());
}

void add_boundary_point(const SurrogateDomain& dom, const SurrogateEdge& se,
                        const BoundaryPoint& bp, const Traces& tr, const BoundaryProblem& prob,
                        double g, int np, double* Aloc, double* bloc) {
  const auto it = prob.segments.find(bp.segment);
  if (it == prob.segments.end())
    throw Error("boundary problem: no condition for segment " + std::to_string(bp.segment));
  const SegmentCondition& c = it->second;
  const double w = bp.w;
  const double* vb = tr.vb.data();
  const double* gb = tr.gb.data();
  const double* vx = tr.vx.data();
  const double* gx = tr.gx.data();
  auto mat = [&](double a, const double* test, const double* trial) {
    kernels::outer_add(np, np, w * a, test, trial, Aloc);
  };
  auto rhs = [&](double a, const double* test) { kernels::axpy(np, w * a, test, bloc); };
  const bool nitsche = prob.form == WeakForm::nitsche;
  const double nn = se.nbar.dot(bp.n);

  if (dom.conformal()) {
    switch (c.kind) {
      case BcKind::dirichlet: {
        const double uD = c.value(bp.x, bp.n, bp.segment);
        mat(1 / g, vb, vb);
        rhs(uD / g, vb);
        if (prob.dirichlet_flux) {
          mat(-1, vb, gb);
          if (nitsche) {
            mat(-1, gb, vb);
            rhs(-uD, gb);
          }
        }
        break;
      }
      case BcKind::neumann: {
        const double qN = c.flux(bp.x, bp.n, bp.segment);
        rhs(qN, vb);
        if (prob.neumann == NeumannVariant::with_symmetric_penalty) {
          mat(-g, gb, gb);
          rhs(-g * qN, gb);
        }
        break;
      }
      case BcKind::robin: {
        const double uR = c.value(bp.x, bp.n, bp.segment);
        const double qR = c.flux(bp.x, bp.n, bp.segment);
        const double eps = c.eps(bp.x);
        // 1/(eps+g), g/(eps+g), eps/(eps+g), eps g/(eps+g) with the eps = inf limit
        const double a0 = std::isinf(eps) ? 0.0 : 1 / (eps + g);
        const double a1 = std::isinf(eps) ? 0.0 : g / (eps + g);
        const double a2 = std::isinf(eps) ? 1.0 : eps / (eps + g);
        const double a3 = std::isinf(eps) ? g : eps * g / (eps + g);
        mat(a0, vb, vb);
        mat(-a1, vb, gb);
        rhs(a0 * uR + a2 * qR, vb);
        if (prob.robin != RobinVariant::aubin) {
          mat(-a1, gb, vb);
          mat(-a3, gb, gb);
          rhs(-a1 * uR - a3 * qR, gb);
        }
        break;
      }
    }
    return;
  }

  switch (c.kind) {
    case BcKind::dirichlet: {
      const double uD = c.value(bp.x, bp.n, bp.segment);
      const double* pen = prob.dirichlet == DirichletVariant::symmetric ? vx : vb;
      mat(1 / g, pen, vx);
      rhs(uD / g, pen);
      if (prob.dirichlet_flux) {
        mat(-1, vb, gb);
        if (nitsche) {
          mat(-1, gb, vx);
          rhs(-uD, gb);
        }
      }
      break;
    }
    case BcKind::neumann: {
      const double qN = c.flux(bp.x, bp.n, bp.segment);
      mat(-1, vb, gb);
      mat(nn, vb, gx);
      rhs(nn * qN, vb);
      if (prob.neumann == NeumannVariant::with_symmetric_penalty) {
        mat(-g * nn, gb, gx);
        rhs(-g * nn * qN, gb);
      }
      break;
    }
    case BcKind::robin: {
      const double uR = c.value(bp.x, bp.n, bp.segment);
      const double qR = c.flux(bp.x, bp.n, bp.segment);
      const double eps = c.eps(bp.x);
      double gg = g, fl = 1.0;
      if (prob.robin == RobinVariant::nitsche_corrected_coeffs) {
        if (nn < 0.05)
          throw Error("robin: nbar.n below 0.05 on edge of element " + std::to_string(se.element));
        gg = nn * g;
      }
      if (prob.robin == RobinVariant::inconsistent) fl = nn;
      const double c1 = std::isinf(eps) ? 0.0 : gg / (gg + eps);
      const double c2 = std::isinf(eps) ? gg : gg * eps / (gg + eps);
      mat(-1, vb, gb);
      // test operator v(x)/g - dnbar v(xbar), or v(x)/g for the Aubin family
      auto tmat = [&](double a, const double* trial) {
        mat(a / g, vx, trial);
        if (prob.robin != RobinVariant::aubin) mat(-a, gb, trial);
      };
      auto trhs = [&](double a) {
        rhs(a / g, vx);
        if (prob.robin != RobinVariant::aubin) rhs(-a, gb);
      };
      tmat(c1, vx);
      tmat(c2 * fl, gx);
      trhs(c1 * uR + c2 * fl * qR);
      break;
    }
  }
}

AssembledSystem assemble(const SurrogateDomain& dom, const ReferenceElement& ref,
                         const BoundaryProblem& prob, const AssemblyOptions& opt) {
  prob.validate(dom);
  const TriMesh& mesh = *dom.mesh;
  AssembledSystem sys;
  sys.dofs = build_dofs(dom, ref);
  sys.gamma = prob.c_gamma * std::pow(dom.stats.h_avg, prob.gamma_power);
  sys.symmetric = prob.symmetric_hint;
  const int np = ref.size();
  const int nq = static_cast<int>(ref.cubature().w.size());

  std::vector<std::vector<int>> edges_of(mesh.num_triangles());
  for (size_t i = 0; i < dom.edges.size(); ++i) edges_of[dom.edges[i].element].push_back(static_cast<int>(i));

  const bool do_vol = opt.parts != AssemblyParts::boundary;
  const bool do_bnd = opt.parts != AssemblyParts::volume;

  auto element_work = [&](int e, double* Aloc, double* bloc) {
    std::fill(Aloc, Aloc + np * np, 0.0);
    std::fill(bloc, bloc + np, 0.0);
    const AffineMap m = mesh.affine(e);
    if (do_vol) {
      RowMat Gx(nq, np), Gy(nq, np);
      std::vector<double> w(nq), wa(nq);
      const double rx = m.Jinv(0, 0), sx = m.Jinv(1, 0), ry = m.Jinv(0, 1), sy = m.Jinv(1, 1);
      Gx = rx * ref.cub_dr() + sx * ref.cub_ds();
      Gy = ry * ref.cub_dr() + sy * ref.cub_ds();
      for (int q = 0; q < nq; ++q) {
        w[q] = ref.cubature().w[q] * m.detJ;
        wa[q] = prob.alpha * w[q];
        const double fq = prob.f(m.to_physical(ref.cubature().pts[q]));
        kernels::axpy(np, w[q] * fq, ref.cub_phi().row(q).data(), bloc);
      }
      kernels::weighted_gram(nq, np, w.data(), Gx.data(), Gx.data(), Aloc);
      kernels::weighted_gram(nq, np, w.data(), Gy.data(), Gy.data(), Aloc);
      if (prob.alpha != 0.0)
        kernels::weighted_gram(nq, np, wa.data(), ref.cub_phi().data(), ref.cub_phi().data(), Aloc);
    }
    if (do_bnd && !edges_of[e].empty()) {
      const double g = gamma_of(prob, dom, e);
      Traces tr;
      for (int id : edges_of[e]) {
        const SurrogateEdge& se = dom.edges[id];
        for (const auto& bp : se.qp) {
          compute_traces(mesh, ref, se, bp, tr);
          add_boundary_point(dom, se, bp, tr, prob, g, np, Aloc, bloc);
        }
      }
    }
  };

  const int na = static_cast<int>(dom.active_elements.size());
  const int chunk = 256;
  std::vector<double> Abuf(static_cast<size_t>(chunk) * np * np), bbuf(static_cast<size_t>(chunk) * np);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(na) * np * np);
  sys.b = Vec::Zero(sys.dofs.ndof);
  const int nthreads = std::max(1, opt.threads);
  for (int start = 0; start < na; start += chunk) {
    const int count = std::min(chunk, na - start);
    auto run = [&](int i) {
      element_work(dom.active_elements[start + i], Abuf.data() + static_cast<size_t>(i) * np * np,
                   bbuf.data() + static_cast<size_t>(i) * np);
    };
    if (nthreads == 1) {
      for (int i = 0; i < count; ++i) run(i);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
          for (int i; (i = next.fetch_add(1)) < count;) run(i);
        });
      for (auto& th : pool) th.join();
    }
    // scatter in element order, independent of the thread schedule
    for (int i = 0; i < count; ++i) {
      const int* gdof = sys.dofs.element(dom.active_elements[start + i]);
      const double* Al = Abuf.data() + static_cast<size_t>(i) * np * np;
      const double* bl = bbuf.data() + static_cast<size_t>(i) * np;
      for (int a = 0; a < np; ++a) {
        sys.b(gdof[a]) += bl[a];
        for (int c = 0; c < np; ++c)
          if (Al[a * np + c] != 0.0) trip.emplace_back(gdof[a], gdof[c], Al[a * np + c]);
      }
    }
  }

  if (prob.pin_at) {
    int best = 0;
    for (int i = 1; i < sys.dofs.ndof; ++i)
      if ((sys.dofs.coords[i] - *prob.pin_at).norm() < (sys.dofs.coords[best] - *prob.pin_at).norm()) best = i;
    std::erase_if(trip, [&](const auto& t) { return t.row() == best; });
    trip.emplace_back(best, best, 1.0);
    sys.b(best) = prob.pin_value;
  }
  sys.A.resize(sys.dofs.ndof, sys.dofs.ndof);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  return sys;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n" << std::setprecision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_vector_market(const Vec& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "%%MatrixMarket matrix array real general\n" << b.size() << " 1\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < b.size(); ++i) out << b(i) << "\n";
}

BcKind parse_bc(const std::string& s) {
  if (s == "dirichlet") return BcKind::dirichlet;
  if (s == "neumann") return BcKind::neumann;
  if (s == "robin") return BcKind::robin;
  throw Error("unknown boundary condition '" + s + "'");
}

WeakForm parse_form(const std::string& s) {
  if (s == "nitsche") return WeakForm::nitsche;
  if (s == "aubin") return WeakForm::aubin;
  throw Error("unknown weak form '" + s + "'");
}

RobinVariant parse_robin(const std::string& s) {
  if (s == "inconsistent") return RobinVariant::inconsistent;
  if (s == "nitsche_corrected_coeffs") return RobinVariant::nitsche_corrected_coeffs;
  if (s == "nitsche_full_condition") return RobinVariant::nitsche_full_condition;
  if (s == "aubin") return RobinVariant::aubin;
  throw Error("unknown Robin formulation '" + s + "'");
}

std::string to_string(RobinVariant v) {
  switch (v) {
    case RobinVariant::inconsistent: return "inconsistent";
    case RobinVariant::nitsche_corrected_coeffs: return "nitsche_corrected_coeffs";
    case RobinVariant::nitsche_full_condition: return "nitsche_full_condition";
    case RobinVariant::aubin: return "aubin";
  }
  return "?";
}

} // namespace sbm
