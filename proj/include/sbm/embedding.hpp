#pragma once

#include <string>
#include <vector>

#include "sbm/geometry.hpp"
#include "sbm/mesh.hpp"

namespace sbm {

enum class Method { cbm, sbm_e, sbm_ei, sbm_i };
enum class ElementClass { inside, cut, outside };
enum class Mapping { identity, closest_point, in_element_equidistant };

Method parse_method(const std::string& s);
std::string to_string(Method m);
Mapping default_mapping(Method m);
// extrapolation families keep only inside elements
bool uses_inside_only(Method m);

struct BoundaryPoint {
  Vec2 xbar;     // quadrature point on the surrogate edge
  double w = 0;  // physical quadrature weight
  Vec2 x;        // mapped point on the true boundary
  Vec2 d;        // x - xbar
  Vec2 n, t;     // true normal / tangent at x
  Vec2 ref_xbar, ref_x;  // reference coordinates in the owning element
  int segment = 0;
};

struct SurrogateEdge {
  int element = -1, local_edge = -1;
  int v0 = -1, v1 = -1;
  Vec2 nbar;  // points out of the active set
  double length = 0;
  std::vector<BoundaryPoint> qp;
};

struct SurrogateDomain {
  Method method = Method::cbm;
  Mapping mapping = Mapping::identity;
  const TriMesh* mesh = nullptr;
  std::vector<ElementClass> cls;
  std::vector<char> active;
  std::vector<int> active_elements;
  std::vector<SurrogateEdge> edges;
  MeshStats stats;  // over the active elements
  int mapping_fallbacks = 0;
  // CBM treats the surrogate itself as the boundary
  bool conformal() const { return method == Method::cbm; }
};

struct EmbeddingOptions {
  int edge_points = -1;          // default P + 2
  double extrapolation_guard = 10.0;
  int mapping_override = -1;     // cast of Mapping, -1 keeps the method default
};

std::vector<ElementClass> classify(const TriMesh& mesh, const Geometry& g);

// geometry may be null for CBM (segment 0 everywhere)
SurrogateDomain build_surrogate(const TriMesh& mesh, const Geometry* g, Method method, int P,
                                const EmbeddingOptions& opt = {});

// same active set and surrogate, every mapped point pulled back onto its edge (d = 0, n = nbar)
SurrogateDomain with_zero_distance(const SurrogateDomain& dom, Method as);

void write_surrogate_csv(const SurrogateDomain& dom, const std::string& path);

} // namespace sbm
