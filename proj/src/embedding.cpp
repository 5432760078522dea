#include "sbm/embedding.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <queue>

#include "sbm/reference_element.hpp"

namespace sbm {

Method parse_method(const std::string& s) {
  if (s == "cbm" || s == "CBM") return Method::cbm;
  if (s == "sbm-e" || s == "sbm_e" || s == "SBM-e") return Method::sbm_e;
  if (s == "sbm-ei" || s == "sbm_ei" || s == "SBM-ei") return Method::sbm_ei;
  if (s == "sbm-i" || s == "sbm_i" || s == "SBM-i") return Method::sbm_i;
  throw Error("unknown method '" + s + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::cbm: return "CBM";
    case Method::sbm_e: return "SBM-e";
    case Method::sbm_ei: return "SBM-ei";
    case Method::sbm_i: return "SBM-i";
  }
  return "?";
}

Mapping default_mapping(Method m) {
  switch (m) {
    case Method::cbm: return Mapping::identity;
    case Method::sbm_e:
    case Method::sbm_ei: return Mapping::closest_point;
    case Method::sbm_i: return Mapping::in_element_equidistant;
  }
  return Mapping::identity;
}

bool uses_inside_only(Method m) { return m == Method::sbm_e; }

std::vector<ElementClass> classify(const TriMesh& mesh, const Geometry& g) {
  std::vector<double> phi(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) phi[i] = g.phi(mesh.vertices()[i]);
  std::vector<ElementClass> cls(mesh.num_triangles());
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    int in = 0;
    for (int v : mesh.triangles()[e]) in += phi[v] >= 0;
    cls[e] = in == 3 ? ElementClass::inside : in == 0 ? ElementClass::outside : ElementClass::cut;
  }
  return cls;
}

namespace {

Vec2 barycentric(const TriMesh& mesh, int e, const Vec2& x) {
  // returns (l1, l2); l0 = 1 - l1 - l2
  const AffineMap m = mesh.affine(e);
  const Vec2 rs = m.to_reference(x);
  return Vec2(0.5 * (1 + rs.x()), 0.5 * (1 + rs.y()));
}

void check_guard(const TriMesh& mesh, int e, const Vec2& x, double guard) {
  const Vec2 l = barycentric(mesh, e, x);
  const double l0 = 1 - l.x() - l.y();
  if (std::max({std::abs(l0), std::abs(l.x()), std::abs(l.y())}) > guard)
    throw Error("embedding: mapped point far outside element " + std::to_string(e) +
                " (barycentric guard exceeded)");
}

void fill_point(BoundaryPoint& bp, const Projection& pr, const AffineMap& m) {
  bp.x = pr.point;
  bp.d = bp.x - bp.xbar;
  bp.n = pr.normal;
  bp.t = Vec2(-bp.n.y(), bp.n.x());
  bp.segment = pr.segment;
  bp.ref_x = m.to_reference(bp.x);
}

} // namespace

SurrogateDomain build_surrogate(const TriMesh& mesh, const Geometry* g, Method method, int P,
                                const EmbeddingOptions& opt) {
  SurrogateDomain dom;
  dom.method = method;
  dom.mesh = &mesh;
  dom.mapping = opt.mapping_override >= 0 ? static_cast<Mapping>(opt.mapping_override)
                                          : default_mapping(method);
  if (method == Method::cbm) dom.mapping = Mapping::identity;
  require(method == Method::cbm || g != nullptr, "build_surrogate: unfitted methods need a geometry");

  const int ne = mesh.num_triangles();
  if (method == Method::cbm) {
    dom.cls.assign(ne, ElementClass::inside);
    dom.active.assign(ne, 1);
  } else {
    dom.cls = classify(mesh, *g);
    dom.active.assign(ne, 0);
    for (int e = 0; e < ne; ++e) {
      const ElementClass c = dom.cls[e];
      dom.active[e] = uses_inside_only(method) ? c == ElementClass::inside : c != ElementClass::outside;
    }
  }
  for (int e = 0; e < ne; ++e)
    if (dom.active[e]) dom.active_elements.push_back(e);
  if (dom.active_elements.empty()) throw Error("embedding: active element set is empty");

  // edge connectivity of the active set
  {
    std::vector<char> seen(ne, 0);
    std::queue<int> q;
    q.push(dom.active_elements.front());
    seen[dom.active_elements.front()] = 1;
    size_t count = 0;
    while (!q.empty()) {
      const int e = q.front();
      q.pop();
      ++count;
      for (int k = 0; k < 3; ++k) {
        const int f = mesh.neighbor(e, k);
        if (f >= 0 && dom.active[f] && !seen[f]) {
          seen[f] = 1;
          q.push(f);
        }
      }
    }
    if (count != dom.active_elements.size())
      throw Error("embedding: active element set is not edge-connected");
  }
  dom.stats = mesh.stats(dom.active_elements);

  const Rule1D rule = gauss_legendre(opt.edge_points > 0 ? opt.edge_points : P + 2);
  for (int e : dom.active_elements) {
    const AffineMap m = mesh.affine(e);
    const auto& tri = mesh.triangles()[e];
    for (int k = 0; k < 3; ++k) {
      const int f = mesh.neighbor(e, k);
      if (f >= 0 && dom.active[f]) continue;
      SurrogateEdge se;
      se.element = e;
      se.local_edge = k;
      se.v0 = tri[k];
      se.v1 = tri[(k + 1) % 3];
      const Vec2 a = mesh.vertices()[se.v0], b = mesh.vertices()[se.v1];
      se.length = (b - a).norm();
      se.nbar = Vec2(b.y() - a.y(), a.x() - b.x()) / se.length;  // CCW element: outward

      bool equidistant = dom.mapping == Mapping::in_element_equidistant;
      Vec2 xa, xb;
      if (equidistant) {
        const Vec2 c = mesh.vertices()[tri[(k + 2) % 3]];
        const bool ca = (g->phi(a) >= 0) != (g->phi(c) >= 0);
        const bool cb = (g->phi(b) >= 0) != (g->phi(c) >= 0);
        if (ca && cb) {
          xa = find_crossing(*g, a, c);
          xb = find_crossing(*g, b, c);
        } else {
          equidistant = false;
          ++dom.mapping_fallbacks;
        }
      }
      for (size_t q = 0; q < rule.x.size(); ++q) {
        BoundaryPoint bp;
        const double t = 0.5 * (1 + rule.x[q]);
        bp.xbar = a + t * (b - a);
        bp.w = 0.5 * rule.w[q] * se.length;
        bp.ref_xbar = m.to_reference(bp.xbar);
        if (dom.mapping == Mapping::identity) {
          Projection pr{bp.xbar, se.nbar, 0};
          if (g) pr.segment = g->project(bp.xbar).segment;
          fill_point(bp, pr, m);
        } else if (equidistant) {
          const Vec2 x = g->arc_point(xa, xb, t);
          Projection pr = g->project(x);
          pr.point = x;
          fill_point(bp, pr, m);
        } else {
          fill_point(bp, g->project(bp.xbar), m);
        }
        check_guard(mesh, e, bp.x, opt.extrapolation_guard);
        se.qp.push_back(bp);
      }
      dom.edges.push_back(std::move(se));
    }
  }
  return dom;
}

SurrogateDomain with_zero_distance(const SurrogateDomain& dom, Method as) {
  SurrogateDomain out = dom;
  out.method = as;
  out.mapping = Mapping::identity;
  for (auto& se : out.edges)
    for (auto& bp : se.qp) {
      bp.x = bp.xbar;
      bp.d = Vec2::Zero();
      bp.n = se.nbar;
      bp.t = Vec2(-se.nbar.y(), se.nbar.x());
      bp.ref_x = bp.ref_xbar;
    }
  return out;
}

void write_surrogate_csv(const SurrogateDomain& dom, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  out << "edge,element,q,xbar_x,xbar_y,x_x,x_y,d_x,d_y,n_x,n_y,nbar_x,nbar_y,weight,segment\n";
  for (size_t i = 0; i < dom.edges.size(); ++i) {
    const auto& se = dom.edges[i];
    for (size_t q = 0; q < se.qp.size(); ++q) {
      const auto& bp = se.qp[q];
      out << i << "," << se.element << "," << q << "," << bp.xbar.x() << "," << bp.xbar.y() << ","
          << bp.x.x() << "," << bp.x.y() << "," << bp.d.x() << "," << bp.d.y() << "," << bp.n.x()
          << "," << bp.n.y() << "," << se.nbar.x() << "," << se.nbar.y() << "," << bp.w << ","
          << bp.segment << "\n";
    }
  }
}

} // namespace sbm
