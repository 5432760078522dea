#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbm/embedding.hpp"
#include "sbm/reference_element.hpp"

namespace sbm {

struct DofMap {
  int ndof = 0;
  std::vector<int> offset;  // per mesh element, start in `local_to_global`, -1 if inactive
  std::vector<int> local_to_global;
  std::vector<Vec2> coords;
  const int* element(int e) const { return local_to_global.data() + offset[e]; }
};

// shared nodes are merged by position with tolerance 1e-10 h_min
DofMap build_dofs(const SurrogateDomain& dom, const ReferenceElement& ref);

enum class BcKind { dirichlet, neumann, robin };
enum class WeakForm { nitsche, aubin };
enum class DirichletVariant { nonsymmetric, symmetric };
enum class NeumannVariant { plain, with_symmetric_penalty };
enum class RobinVariant { inconsistent, nitsche_corrected_coeffs, nitsche_full_condition, aubin };
enum class GammaScaling { avg, local_h };

using Field = std::function<double(const Vec2&)>;
// boundary data sees the mapped point, the normal used there and its segment
using BoundaryField = std::function<double(const Vec2& x, const Vec2& n, int segment)>;

struct SegmentCondition {
  BcKind kind = BcKind::dirichlet;
  BoundaryField value;   // u_D, or u_RD for Robin
  BoundaryField flux;    // q_N, or q_RN for Robin
  std::function<double(const Vec2&)> eps;  // Robin only
};

struct BoundaryProblem {
  double alpha = 0.0;
  Field f;
  std::map<int, SegmentCondition> segments;
  WeakForm form = WeakForm::aubin;
  DirichletVariant dirichlet = DirichletVariant::nonsymmetric;
  NeumannVariant neumann = NeumannVariant::plain;
  RobinVariant robin = RobinVariant::nitsche_full_condition;
  GammaScaling gamma_scaling = GammaScaling::avg;
  double c_gamma = 0.5;
  int gamma_power = 1;
  bool dirichlet_flux = true;  // false keeps only the penalty terms
  bool symmetric_hint = false;
  // replaces the row of the dof nearest `pin_at` by u(pin) = pin_value
  std::optional<Vec2> pin_at;
  double pin_value = 0.0;

  // every boundary point segment must carry exactly one condition
  void validate(const SurrogateDomain& dom) const;
};

enum class AssemblyParts { all, volume, boundary };

struct AssemblyOptions {
  int threads = 1;
  AssemblyParts parts = AssemblyParts::all;
};

struct AssembledSystem {
  SpMat A;
  Vec b;
  DofMap dofs;
  double gamma = 0.0;  // global gamma (avg scaling)
  bool symmetric = false;
};

double gamma_of(const BoundaryProblem& prob, const SurrogateDomain& dom, int element);

AssembledSystem assemble(const SurrogateDomain& dom, const ReferenceElement& ref,
                         const BoundaryProblem& prob, const AssemblyOptions& opt = {});

// boundary traces of the owning element's nodal basis at one boundary point
struct Traces {
  std::vector<double> vb, gb, vx, gx;  // v(xbar), grad v(xbar).nbar, v(x), grad v(x).n
};
void compute_traces(const TriMesh& mesh, const ReferenceElement& ref, const SurrogateEdge& se,
                    const BoundaryPoint& bp, Traces& tr);

// adds the boundary contribution of one point to a dense local matrix / vector
void add_boundary_point(const SurrogateDomain& dom, const SurrogateEdge& se,
                        const BoundaryPoint& bp, const Traces& tr, const BoundaryProblem& prob,
                        double gamma, int np, double* Aloc, double* bloc);

void write_matrix_market(const SpMat& A, const std::string& path);
void write_vector_market(const Vec& b, const std::string& path);

BcKind parse_bc(const std::string& s);
WeakForm parse_form(const std::string& s);
RobinVariant parse_robin(const std::string& s);
std::string to_string(RobinVariant v);

} // namespace sbm
