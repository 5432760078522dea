#include "sbm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sbm {

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : verts_(std::move(vertices)), tris_(std::move(triangles)) {
  build();
}

void TriMesh::build() {
  const int nv = num_vertices();
  double scale = 0.0;
  for (const auto& t : tris_)
    for (int k = 0; k < 3; ++k) {
      require(t[k] >= 0 && t[k] < nv, "mesh: triangle references a missing vertex");
      scale = std::max(scale, (verts_[t[k]] - verts_[t[(k + 1) % 3]]).norm());
    }
  for (size_t e = 0; e < tris_.size(); ++e) {
    auto& t = tris_[e];
    const Vec2 a = verts_[t[1]] - verts_[t[0]], b = verts_[t[2]] - verts_[t[0]];
    const double cr = a.x() * b.y() - a.y() * b.x();
    if (!(std::abs(cr) > 1e-14 * scale * scale))
      throw Error("mesh: degenerate triangle " + std::to_string(e));
    if (cr < 0) std::swap(t[1], t[2]);
  }

  nbr_.assign(tris_.size(), {-1, -1, -1});
  tedge_.assign(tris_.size(), {-1, -1, -1});
  edges_.clear();
  std::map<std::pair<int, int>, std::pair<int, int>> owner;  // edge -> (element, local edge)
  for (int e = 0; e < num_triangles(); ++e)
    for (int k = 0; k < 3; ++k) {
      const int a = tris_[e][k], b = tris_[e][(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = owner.find(key);
      if (it == owner.end()) {
        owner.emplace(key, std::make_pair(e, k));
        tedge_[e][k] = static_cast<int>(edges_.size());
        edges_.push_back({key.first, key.second});
      } else {
        const auto [f, l] = it->second;
        if (nbr_[f][l] != -1) throw Error("mesh: edge shared by more than two triangles");
        nbr_[f][l] = e;
        nbr_[e][k] = f;
        tedge_[e][k] = tedge_[f][l];
      }
    }
}

AffineMap TriMesh::affine(int e) const {
  const auto& t = tris_[e];
  AffineMap m;
  m.v0 = verts_[t[0]];
  m.J.col(0) = 0.5 * (verts_[t[1]] - verts_[t[0]]);
  m.J.col(1) = 0.5 * (verts_[t[2]] - verts_[t[0]]);
  m.detJ = m.J.determinant();
  m.Jinv = m.J.inverse();
  return m;
}

double TriMesh::area(int e) const { return 2.0 * affine(e).detJ; }

double TriMesh::element_h(int e) const {
  const auto& t = tris_[e];
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (verts_[t[k]] - verts_[t[(k + 1) % 3]]).norm();
  return s / 3.0;
}

double TriMesh::element_hmax(int e) const {
  const auto& t = tris_[e];
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s = std::max(s, (verts_[t[k]] - verts_[t[(k + 1) % 3]]).norm());
  return s;
}

MeshStats TriMesh::stats() const {
  std::vector<int> all(tris_.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return stats(all);
}

MeshStats TriMesh::stats(const std::vector<int>& elements) const {
  MeshStats s;
  std::vector<char> seen(edges_.size(), 0), vseen(verts_.size(), 0);
  double sum = 0.0;
  s.h_min = INFINITY;
  for (int e : elements)
    for (int k = 0; k < 3; ++k) {
      vseen[tris_[e][k]] = 1;
      const int id = tedge_[e][k];
      if (seen[id]) continue;
      seen[id] = 1;
      const double L = (verts_[edges_[id][0]] - verts_[edges_[id][1]]).norm();
      s.h_min = std::min(s.h_min, L);
      s.h_max = std::max(s.h_max, L);
      sum += L;
      ++s.n_edges;
    }
  s.h_avg = s.n_edges ? sum / s.n_edges : 0.0;
  if (!s.n_edges) s.h_min = 0.0;
  s.n_triangles = static_cast<int>(elements.size());
  s.n_vertices = static_cast<int>(std::count(vseen.begin(), vseen.end(), 1));
  return s;
}

} // namespace sbm
