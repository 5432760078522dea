#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sbm/types.hpp"

namespace sbm {

struct AffineMap {
  Vec2 v0;
  Eigen::Matrix2d J, Jinv;
  double detJ = 0.0;

  // x = v0 + J (rs + 1)
  Vec2 to_physical(const Vec2& rs) const { return v0 + J * (rs + Vec2(1, 1)); }
  Vec2 to_reference(const Vec2& x) const { return Jinv * (x - v0) - Vec2(1, 1); }
};

struct MeshStats {
  double h_min = 0, h_avg = 0, h_max = 0;
  int n_vertices = 0, n_triangles = 0, n_edges = 0;
};

class TriMesh {
public:
  TriMesh() = default;
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Vec2>& vertices() const { return verts_; }
  const std::vector<std::array<int, 3>>& triangles() const { return tris_; }
  int num_vertices() const { return static_cast<int>(verts_.size()); }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  // neighbor across local edge k (vertices k, k+1); -1 on the hull
  int neighbor(int e, int k) const { return nbr_[e][k]; }
  int edge_id(int e, int k) const { return tedge_[e][k]; }
  const std::array<int, 2>& edge(int id) const { return edges_[id]; }

  AffineMap affine(int e) const;
  double area(int e) const;
  // mean / max length of the three element edges
  double element_h(int e) const;
  double element_hmax(int e) const;

  MeshStats stats() const;
  MeshStats stats(const std::vector<int>& elements) const;

  bool operator==(const TriMesh& o) const { return verts_ == o.verts_ && tris_ == o.tris_; }

private:
  void build();

  std::vector<Vec2> verts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<std::array<int, 3>> nbr_, tedge_;
  std::vector<std::array<int, 2>> edges_;
};

TriMesh read_gmsh(const std::string& path);
TriMesh read_gmsh(std::istream& in);
void write_gmsh(const TriMesh& mesh, std::ostream& out);
void write_gmsh(const TriMesh& mesh, const std::string& path);
std::string mesh_to_json(const TriMesh& mesh);

// Bowyer-Watson Delaunay triangulation of a point set (convex hull is meshed)
TriMesh delaunay(const std::vector<Vec2>& points);

struct MesherOptions {
  std::uint64_t seed = 1;
  double jitter = 0.15;  // interior perturbation as a fraction of the spacing
};

TriMesh mesh_rectangle(const Vec2& lo, const Vec2& hi, double lc, const MesherOptions& opt = {});
// boundary vertices are placed on the circle itself
TriMesh mesh_disk(const Vec2& center, double radius, double lc, const MesherOptions& opt = {});

} // namespace sbm
