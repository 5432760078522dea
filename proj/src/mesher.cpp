#include <algorithm>
#include <cmath>
#include <map>

#include "sbm/mesh.hpp"
#include "sbm/rng.hpp"

namespace sbm {

namespace {

struct DTri {
  int v[3];
  Vec2 cc;
  double r2;
  bool alive;
};

DTri make_tri(const std::vector<Vec2>& p, int a, int b, int c) {
  DTri t{{a, b, c}, Vec2::Zero(), 0.0, true};
  const Vec2 A = p[a], B = p[b], C = p[c];
  const double d = 2.0 * (A.x() * (B.y() - C.y()) + B.x() * (C.y() - A.y()) + C.x() * (A.y() - B.y()));
  const double a2 = A.squaredNorm(), b2 = B.squaredNorm(), c2 = C.squaredNorm();
  t.cc = Vec2((a2 * (B.y() - C.y()) + b2 * (C.y() - A.y()) + c2 * (A.y() - B.y())) / d,
              (a2 * (C.x() - B.x()) + b2 * (A.x() - C.x()) + c2 * (B.x() - A.x())) / d);
  t.r2 = (A - t.cc).squaredNorm();
  return t;
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

} // namespace

TriMesh delaunay(const std::vector<Vec2>& points) {
  require(points.size() >= 3, "delaunay: need at least three points");
  Vec2 lo = points[0], hi = points[0];
  for (const auto& q : points) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double span = std::max((hi - lo).maxCoeff(), 1e-300);
  const Vec2 mid = 0.5 * (lo + hi);
  std::vector<Vec2> p = points;
  const int n = static_cast<int>(points.size());
  p.push_back(mid + Vec2(-40 * span, -30 * span));
  p.push_back(mid + Vec2(40 * span, -30 * span));
  p.push_back(mid + Vec2(0, 40 * span));

  std::vector<DTri> tris{make_tri(p, n, n + 1, n + 2)};
  std::vector<int> bad;
  std::map<std::pair<int, int>, int> boundary;
  for (int i = 0; i < n; ++i) {
    const Vec2 x = p[i];
    bad.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      const DTri& T = tris[t];
      if (!T.alive) continue;
      if ((x - T.cc).squaredNorm() < T.r2 * (1.0 - 1e-12)) bad.push_back(t);
    }
    if (bad.empty()) throw Error("delaunay: point outside triangulation or duplicate point");
    boundary.clear();
    for (int t : bad) {
      tris[t].alive = false;
      for (int k = 0; k < 3; ++k) {
        const int a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
        auto rev = boundary.find({b, a});
        if (rev != boundary.end()) boundary.erase(rev);
        else boundary[{a, b}] = 1;
      }
    }
    for (const auto& [ed, unused] : boundary) {
      if (!(orient(p[ed.first], p[ed.second], x) > 0))
        throw Error("delaunay: cavity is not star-shaped (duplicate or collinear input)");
      tris.push_back(make_tri(p, ed.first, ed.second, i));
    }
    if (tris.size() > 4 * static_cast<size_t>(i + 8)) {
      std::erase_if(tris, [](const DTri& T) { return !T.alive; });
    }
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& T : tris) {
    if (!T.alive || T.v[0] >= n || T.v[1] >= n || T.v[2] >= n) continue;
    out.push_back({T.v[0], T.v[1], T.v[2]});
  }
  // deterministic element order: by centroid, row-major
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    const Vec2 ca = (points[a[0]] + points[a[1]] + points[a[2]]) / 3.0;
    const Vec2 cb = (points[b[0]] + points[b[1]] + points[b[2]]) / 3.0;
    if (ca.y() != cb.y()) return ca.y() < cb.y();
    return ca.x() < cb.x();
  });
  return TriMesh(points, std::move(out));
}

TriMesh mesh_rectangle(const Vec2& lo, const Vec2& hi, double lc, const MesherOptions& opt) {
  require(lc > 0 && (hi - lo).minCoeff() > 0, "mesh_rectangle: bad extents");
  const int nx = std::max(1, static_cast<int>(std::lround((hi.x() - lo.x()) / lc)));
  const int ny = std::max(1, static_cast<int>(std::lround((hi.y() - lo.y()) / lc)));
  const double dx = (hi.x() - lo.x()) / nx, dy = (hi.y() - lo.y()) / ny;
  SplitMix64 rng(opt.seed);
  std::vector<Vec2> pts;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Vec2 q(lo.x() + i * dx, lo.y() + j * dy);
      if (i == nx) q.x() = hi.x();
      if (j == ny) q.y() = hi.y();
      const double jx = rng.uniform(-1, 1), jy = rng.uniform(-1, 1);
      if (i > 0 && i < nx && j > 0 && j < ny) q += opt.jitter * Vec2(jx * dx, jy * dy);
      pts.push_back(q);
    }
  // tiny deterministic tilt breaks the cocircular ties of an unjittered grid
  if (opt.jitter == 0.0)
    for (auto& q : pts)
      if (q.x() > lo.x() && q.x() < hi.x() && q.y() > lo.y() && q.y() < hi.y())
        q.x() += 1e-9 * dx * (q.y() - lo.y()) / (hi.y() - lo.y());
  return delaunay(pts);
}

TriMesh mesh_disk(const Vec2& center, double radius, double lc, const MesherOptions& opt) {
  require(lc > 0 && radius > 0, "mesh_disk: bad extents");
  // concentric rings, outermost exactly on the circle
  SplitMix64 rng(opt.seed);
  const int nrings = std::max(1, static_cast<int>(std::round(radius / (lc * std::sqrt(3.0) / 2))));
  const double dr = radius / nrings;
  std::vector<Vec2> pts;
  for (int k = 0; k < nrings; ++k) {
    const double r = radius - k * dr;
    const int n = std::max(k == 0 ? 8 : 6, static_cast<int>(std::round(2 * M_PI * r / lc)));
    const double phase = k == 0 ? 0.0 : rng.uniform(0, 2 * M_PI / n);
    for (int i = 0; i < n; ++i) {
      const double th = phase + 2 * M_PI * i / n;
      Vec2 q = r * Vec2(std::cos(th), std::sin(th));
      const double jx = rng.uniform(-1, 1), jy = rng.uniform(-1, 1);
      if (k > 0) q += 0.25 * opt.jitter * lc * Vec2(jx, jy);
      pts.push_back(center + q);
    }
  }
  pts.push_back(center);
  return delaunay(pts);
}

} // namespace sbm
