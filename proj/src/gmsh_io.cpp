#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sbm/mesh.hpp"

namespace sbm {

namespace {

int nodes_per_element(int type) {
  switch (type) {
    case 15: return 1;
    case 1: return 2;
    case 8: return 3;
    case 26: return 4;
    case 2: return 3;
    case 9: return 6;
    case 20: return 9;
    case 21: return 10;
    case 3: return 4;
    case 16: return 8;
    case 10: return 9;
    case 4: return 4;
    case 11: return 10;
    case 5: return 8;
    case 6: return 6;
    case 7: return 5;
    default: throw Error("gmsh: unsupported element type " + std::to_string(type));
  }
}

bool is_surface(int type) {
  return type == 2 || type == 9 || type == 20 || type == 21 || type == 3 || type == 16 ||
         type == 10;
}
bool is_volume(int type) { return type == 4 || type == 11 || type == 5 || type == 6 || type == 7; }

struct Raw {
  std::map<long, Vec2> nodes;
  std::vector<std::array<long, 3>> tris;
};

void add_element(Raw& raw, int type, const std::vector<long>& nodes) {
  if (is_volume(type)) throw Error("gmsh: 3D elements are not supported");
  if (is_surface(type) && type != 2) throw Error("gmsh: non-triangle 2D elements (type " + std::to_string(type) + ")");
  if (type == 2) raw.tris.push_back({nodes[0], nodes[1], nodes[2]});
}

void expect(std::istream& in, const std::string& tag) {
  std::string s;
  while (in >> s)
    if (s == tag) return;
  throw Error("gmsh: missing " + tag);
}

void read_v2(std::istream& in, Raw& raw) {
  std::string tok;
  while (in >> tok) {
    if (tok == "$Nodes") {
      long n;
      in >> n;
      for (long i = 0; i < n; ++i) {
        long id;
        double x, y, z;
        in >> id >> x >> y >> z;
        raw.nodes[id] = Vec2(x, y);
      }
      expect(in, "$EndNodes");
    } else if (tok == "$Elements") {
      long n;
      in >> n;
      for (long i = 0; i < n; ++i) {
        long id;
        int type, ntags;
        in >> id >> type >> ntags;
        for (int t = 0; t < ntags; ++t) {
          long dummy;
          in >> dummy;
        }
        std::vector<long> nodes(nodes_per_element(type));
        for (auto& v : nodes) in >> v;
        add_element(raw, type, nodes);
      }
      expect(in, "$EndElements");
    }
    if (!in) throw Error("gmsh: truncated file");
  }
}

void read_v4(std::istream& in, Raw& raw) {
  std::string tok;
  while (in >> tok) {
    if (tok == "$Nodes") {
      long nblocks, nnodes, mn, mx;
      in >> nblocks >> nnodes >> mn >> mx;
      for (long b = 0; b < nblocks; ++b) {
        int dim, tag, param;
        long count;
        in >> dim >> tag >> param >> count;
        std::vector<long> ids(count);
        for (auto& id : ids) in >> id;
        for (long i = 0; i < count; ++i) {
          double x, y, z;
          in >> x >> y >> z;
          if (param) {
            double u;
            for (int k = 0; k < dim; ++k) in >> u;
          }
          raw.nodes[ids[i]] = Vec2(x, y);
        }
      }
      expect(in, "$EndNodes");
    } else if (tok == "$Elements") {
      long nblocks, nelem, mn, mx;
      in >> nblocks >> nelem >> mn >> mx;
      for (long b = 0; b < nblocks; ++b) {
        int dim, tag, type;
        long count;
        in >> dim >> tag >> type >> count;
        const int nn = nodes_per_element(type);
        std::vector<long> nodes(nn);
        for (long i = 0; i < count; ++i) {
          long id;
          in >> id;
          for (auto& v : nodes) in >> v;
          add_element(raw, type, nodes);
        }
      }
      expect(in, "$EndElements");
    }
    if (!in) throw Error("gmsh: truncated file");
  }
}

} // namespace

TriMesh read_gmsh(std::istream& in) {
  std::string tok;
  in >> tok;
  if (tok != "$MeshFormat") throw Error("gmsh: missing $MeshFormat header");
  std::string version;
  int filetype = 0, dsize = 0;
  in >> version >> filetype >> dsize;
  if (filetype != 0) throw Error("gmsh: binary files are not supported");
  expect(in, "$EndMeshFormat");
  Raw raw;
  if (version.rfind("2.", 0) == 0) read_v2(in, raw);
  else if (version.rfind("4.", 0) == 0) read_v4(in, raw);
  else throw Error("gmsh: unsupported format version " + version);
  if (raw.tris.empty()) throw Error("gmsh: no triangles");

  // keep only vertices used by triangles, numbered by first use
  std::map<long, int> index;
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  for (const auto& t : raw.tris) {
    std::array<int, 3> tt{};
    for (int k = 0; k < 3; ++k) {
      auto it = raw.nodes.find(t[k]);
      if (it == raw.nodes.end()) throw Error("gmsh: element references unknown node " + std::to_string(t[k]));
      auto [pos, fresh] = index.emplace(t[k], static_cast<int>(verts.size()));
      if (fresh) verts.push_back(it->second);
      tt[k] = pos->second;
    }
    tris.push_back(tt);
  }
  return TriMesh(std::move(verts), std::move(tris));
}

TriMesh read_gmsh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("gmsh: cannot open " + path);
  return read_gmsh(in);
}

void write_gmsh(const TriMesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.num_vertices() << "\n";
  out << std::setprecision(17);
  for (int i = 0; i < mesh.num_vertices(); ++i)
    out << i + 1 << " " << mesh.vertices()[i].x() << " " << mesh.vertices()[i].y() << " 0\n";
  out << "$EndNodes\n$Elements\n" << mesh.num_triangles() << "\n";
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const auto& t = mesh.triangles()[e];
    out << e + 1 << " 2 2 0 1 " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
  out << "$EndElements\n";
}

void write_gmsh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("gmsh: cannot write " + path);
  write_gmsh(mesh, out);
}

std::string mesh_to_json(const TriMesh& mesh) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices()) j["vertices"].push_back({v.x(), v.y()});
  j["triangles"] = mesh.triangles();
  const MeshStats s = mesh.stats();
  j["stats"] = {{"h_min", s.h_min}, {"h_avg", s.h_avg}, {"h_max", s.h_max},
                {"n_vertices", s.n_vertices}, {"n_triangles", s.n_triangles}, {"n_edges", s.n_edges}};
  return j.dump(1);
}

} // namespace sbm
