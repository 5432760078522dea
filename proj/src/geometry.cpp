#include "sbm/geometry.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace sbm {

Vec2 Geometry::arc_point(const Vec2& a, const Vec2& b, double t) const {
  // polyline through projected chord samples, reparametrized by length
  constexpr int n = 128;
  std::vector<Vec2> pts(n + 1);
  std::vector<double> len(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    pts[i] = project(a + (b - a) * (double(i) / n)).point;
    if (i) len[i] = len[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  const double target = t * len[n];
  int i = 1;
  while (i < n && len[i] < target) ++i;
  const double seg = len[i] - len[i - 1];
  const double u = seg > 0 ? (target - len[i - 1]) / seg : 0.0;
  return project(pts[i - 1] + u * (pts[i] - pts[i - 1])).point;
}

Projection Circle::project(const Vec2& x) const {
  Vec2 d = x - c_;
  const double r = d.norm();
  require(r > 1e-14 * R_, "circle: projection of the center is undefined");
  d /= r;
  return {c_ + R_ * d, d, seg_};
}

Vec2 Circle::arc_point(const Vec2& a, const Vec2& b, double t) const {
  const double ta = std::atan2(a.y() - c_.y(), a.x() - c_.x());
  double tb = std::atan2(b.y() - c_.y(), b.x() - c_.x());
  double dt = tb - ta;
  while (dt > M_PI) dt -= 2 * M_PI;
  while (dt < -M_PI) dt += 2 * M_PI;
  const double th = ta + t * dt;
  return c_ + R_ * Vec2(std::cos(th), std::sin(th));
}

std::string Circle::describe() const {
  std::ostringstream s;
  s << "circle(" << c_.x() << "," << c_.y() << ";R=" << R_ << ")";
  return s.str();
}

double Rectangle::phi(const Vec2& x) const {
  const double inside = std::min({x.x() - lo_.x(), hi_.x() - x.x(), x.y() - lo_.y(), hi_.y() - x.y()});
  if (inside >= 0) return inside;
  const Vec2 q = x.cwiseMax(lo_).cwiseMin(hi_);
  return -(x - q).norm();
}

Projection Rectangle::project(const Vec2& x) const {
  const double dist[4] = {x.x() - lo_.x(), hi_.x() - x.x(), x.y() - lo_.y(), hi_.y() - x.y()};
  const Vec2 normals[4] = {Vec2(-1, 0), Vec2(1, 0), Vec2(0, -1), Vec2(0, 1)};
  if (std::min({dist[0], dist[1], dist[2], dist[3]}) >= 0) {
    int k = 0;
    for (int i = 1; i < 4; ++i)
      if (dist[i] < dist[k]) k = i;
    Vec2 p = x;
    if (k == 0) p.x() = lo_.x();
    if (k == 1) p.x() = hi_.x();
    if (k == 2) p.y() = lo_.y();
    if (k == 3) p.y() = hi_.y();
    return {p, normals[k], seg_};
  }
  const Vec2 p = x.cwiseMax(lo_).cwiseMin(hi_);
  int k = 0;
  for (int i = 1; i < 4; ++i)
    if (dist[i] < dist[k]) k = i;
  return {p, normals[k], seg_};
}

std::string Rectangle::describe() const {
  std::ostringstream s;
  s << "rectangle(" << lo_.x() << "," << lo_.y() << ";" << hi_.x() << "," << hi_.y() << ")";
  return s.str();
}

Projection Difference::project(const Vec2& x) const {
  Projection pa = a_->project(x), pb = b_->project(x);
  pb.normal = -pb.normal;
  const bool aok = b_->phi(pa.point) <= 1e-12;
  const bool bok = a_->phi(pb.point) >= -1e-12;
  if (aok && (!bok || (pa.point - x).norm() <= (pb.point - x).norm())) return pa;
  return pb;
}

Vec2 Difference::arc_point(const Vec2& a, const Vec2& b, double t) const {
  const Projection pa = project(a), pb = project(b);
  if (pa.segment == pb.segment) {
    const bool inner = std::abs(b_->phi(pa.point)) < std::abs(a_->phi(pa.point));
    return inner ? b_->arc_point(a, b, t) : a_->arc_point(a, b, t);
  }
  return Geometry::arc_point(a, b, t);
}

std::string Difference::describe() const { return a_->describe() + "-" + b_->describe(); }

Vec2 find_crossing(const Geometry& g, const Vec2& a, const Vec2& b) {
  double fa = g.phi(a);
  const double fb = g.phi(b);
  require((fa >= 0) != (fb >= 0), "find_crossing: no sign change on segment");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double m = 0.5 * (lo + hi);
    const double fm = g.phi(a + m * (b - a));
    if ((fm >= 0) == (fa >= 0)) lo = m;
    else hi = m;
  }
  return a + 0.5 * (lo + hi) * (b - a);
}

} // namespace sbm
