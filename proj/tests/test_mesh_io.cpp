#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sbm/mesh.hpp"
#include "sbm/reference_element.hpp"
#include "sbm/rng.hpp"

using namespace sbm;

namespace {

const char* kOneTriangleV2 =
    "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
    "$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n"
    "$Elements\n4\n1 15 2 0 1 1\n2 1 2 0 1 1 2\n3 1 2 0 1 2 3\n4 2 2 0 1 1 2 3\n$EndElements\n";

const char* kOneTriangleV4 =
    "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n"
    "$Nodes\n1 3 1 3\n2 1 0 3\n1\n2\n3\n0 0 0\n1 0 0\n0 1 0\n$EndNodes\n"
    "$Elements\n1 1 1 1\n2 1 2 1\n1 1 2 3\n$EndElements\n";

TriMesh parse(const std::string& s) {
  std::istringstream in(s);
  return read_gmsh(in);
}

// same triangles with the same corner coordinates, vertex numbering aside
bool same_triangles(const TriMesh& a, const TriMesh& b) {
  if (a.num_triangles() != b.num_triangles()) return false;
  for (int e = 0; e < a.num_triangles(); ++e)
    for (int k = 0; k < 3; ++k)
      if (a.vertices()[a.triangles()[e][k]] != b.vertices()[b.triangles()[e][k]]) return false;
  return true;
}

int interior_edges(const TriMesh& m) {
  int n = 0;
  for (int e = 0; e < m.num_triangles(); ++e)
    for (int k = 0; k < 3; ++k)
      if (m.neighbor(e, k) >= 0) ++n;
  return n / 2;
}

} // namespace

TEST_SUITE("mesh_io") {

TEST_CASE("single triangle, format 2 and 4") {
  for (const char* src : {kOneTriangleV2, kOneTriangleV4}) {
    const TriMesh m = parse(src);
    CHECK(m.num_triangles() == 1);
    CHECK(m.num_vertices() == 3);
    CHECK(m.stats().h_max == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("two-triangle unit square edge count") {
  const TriMesh m({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}, {{0, 1, 2}, {0, 2, 3}});
  CHECK(m.num_edges() == 5);
  CHECK(interior_edges(m) == 1);
}

TEST_CASE("write then read reproduces the mesh") {
  const TriMesh m = mesh_disk(Vec2(0.5, 0.5), 0.375, 0.1);
  std::stringstream ss;
  write_gmsh(m, ss);
  const TriMesh r = read_gmsh(ss);
  CHECK(same_triangles(r, m));
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(parse("$Nodes\n"), Error);
  CHECK_THROWS_AS(parse("$MeshFormat\n3.0 0 8\n$EndMeshFormat\n"), Error);
  CHECK_THROWS_AS(parse("$MeshFormat\n2.2 1 8\n$EndMeshFormat\n"), Error);
  // quad
  CHECK_THROWS_AS(parse("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n"
                        "$EndNodes\n$Elements\n1\n1 3 2 0 1 1 2 3 4\n$EndElements\n"),
                  Error);
  // tetrahedron
  CHECK_THROWS_AS(parse("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
                        "$EndNodes\n$Elements\n1\n1 4 2 0 1 1 2 3 4\n$EndElements\n"),
                  Error);
  // unknown node
  CHECK_THROWS_AS(parse("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0 0\n2 1 0 0\n"
                        "$EndNodes\n$Elements\n1\n1 2 2 0 1 1 2 3\n$EndElements\n"),
                  Error);
  // truncated
  CHECK_THROWS_AS(parse("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n2 1 0"), Error);
  CHECK_THROWS_AS(read_gmsh(std::string("/nonexistent/mesh.msh")), Error);
}

TEST_CASE("bundled circle fixture has h_avg near l_c") {
  const TriMesh m = read_gmsh(std::string(SBM_FIXTURE_DIR) + "/disk_r0375_lc015.msh");
  CHECK(std::abs(m.stats().h_avg - 0.15) <= 0.25 * 0.15);
  // the fixture is the generator output for the default seed
  CHECK(same_triangles(m, mesh_disk(Vec2(0.5, 0.5), 0.375, 0.15)));
}

TEST_CASE("bundled square fixture matches the generator") {
  const TriMesh m = read_gmsh(std::string(SBM_FIXTURE_DIR) + "/square_lc015.msh");
  CHECK(same_triangles(m, mesh_rectangle(Vec2(0, 0), Vec2(1, 1), 0.15)));
  CHECK(std::abs(m.stats().h_avg - 0.15) <= 0.25 * 0.15);
}

TEST_CASE("square at l_c = 0.5 has edges in [0.25, 1]") {
  const TriMesh m = mesh_rectangle(Vec2(0, 0), Vec2(1, 1), 0.5);
  for (int i = 0; i < m.num_edges(); ++i) {
    const double L = (m.vertices()[m.edge(i)[0]] - m.vertices()[m.edge(i)[1]]).norm();
    CHECK(L >= 0.25);
    CHECK(L <= 1.0);
  }
}

TEST_CASE("halving l_c multiplies the element count by 3 to 5") {
  for (double lc : {0.2, 0.1, 0.05}) {
    const double rs = double(mesh_rectangle(Vec2(0, 0), Vec2(1, 1), lc / 2).num_triangles()) /
                      mesh_rectangle(Vec2(0, 0), Vec2(1, 1), lc).num_triangles();
    CHECK(rs >= 3.0);
    CHECK(rs <= 5.0);
    const double rd = double(mesh_disk(Vec2(0.5, 0.5), 0.375, lc / 2).num_triangles()) /
                      mesh_disk(Vec2(0.5, 0.5), 0.375, lc).num_triangles();
    CHECK(rd >= 3.0);
    CHECK(rd <= 5.0);
  }
}

TEST_CASE("disk mesh boundary vertices lie on the circle") {
  for (double lc : {0.2, 0.1, 0.05}) {
    const TriMesh m = mesh_disk(Vec2(0.5, 0.5), 0.375, lc);
    int nb = 0;
    for (int e = 0; e < m.num_triangles(); ++e)
      for (int k = 0; k < 3; ++k)
        if (m.neighbor(e, k) < 0) {
          for (int v : {m.triangles()[e][k], m.triangles()[e][(k + 1) % 3]})
            CHECK(std::abs((m.vertices()[v] - Vec2(0.5, 0.5)).norm() - 0.375) < 1e-12);
          ++nb;
        }
    CHECK(nb > 0);
  }
}

TEST_CASE("generated meshes are positively oriented and deterministic") {
  const TriMesh a = mesh_rectangle(Vec2(0, 0), Vec2(2, 2), 0.1);
  for (int e = 0; e < a.num_triangles(); ++e) CHECK(a.affine(e).detJ > 0);
  CHECK(a == mesh_rectangle(Vec2(0, 0), Vec2(2, 2), 0.1));
  MesherOptions o;
  o.seed = 7;
  CHECK_FALSE(a == mesh_rectangle(Vec2(0, 0), Vec2(2, 2), 0.1, o));
}

TEST_CASE("affine map") {
  const TriMesh ref({Vec2(-1, -1), Vec2(1, -1), Vec2(-1, 1)}, {{0, 1, 2}});
  const AffineMap m = ref.affine(0);
  CHECK((m.J - Eigen::Matrix2d::Identity()).norm() < 1e-15);
  CHECK(m.detJ == doctest::Approx(1.0));
  const TriMesh big({Vec2(0, 0), Vec2(2, 0), Vec2(0, 2)}, {{0, 1, 2}});
  CHECK(big.affine(0).detJ == doctest::Approx(1.0));
  CHECK(big.area(0) == doctest::Approx(2.0));

  SplitMix64 rng(11);
  const ReferenceElement p6(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> v;
    for (int k = 0; k < 3; ++k) v.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const TriMesh t(v, {{0, 1, 2}});
    if (t.area(0) < 1e-2) continue;
    const AffineMap a = t.affine(0);
    double err = 0;
    for (int i = 0; i < p6.size(); ++i) {
      const Vec2 rs(p6.nodes()(i, 0), p6.nodes()(i, 1));
      err = std::max(err, (a.to_reference(a.to_physical(rs)) - rs).norm());
    }
    CHECK(err < 1e-13);
  }
}

}
