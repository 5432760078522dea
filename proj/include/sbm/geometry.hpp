#pragma once

#include <memory>
#include <string>

#include "sbm/types.hpp"

namespace sbm {

struct Projection {
  Vec2 point;
  Vec2 normal;  // outward unit normal of the physical domain
  int segment = 0;
};

// level set phi >= 0 inside the physical domain
class Geometry {
public:
  virtual ~Geometry() = default;
  virtual double phi(const Vec2& x) const = 0;
  virtual Projection project(const Vec2& x) const = 0;
  // point at fraction t of the boundary arc joining a and b (both on the boundary)
  virtual Vec2 arc_point(const Vec2& a, const Vec2& b, double t) const;
  virtual std::string describe() const = 0;
};

class Circle : public Geometry {
public:
  Circle(Vec2 center, double radius, int segment = 0) : c_(center), R_(radius), seg_(segment) {}
  double phi(const Vec2& x) const override { return R_ - (x - c_).norm(); }
  Projection project(const Vec2& x) const override;
  Vec2 arc_point(const Vec2& a, const Vec2& b, double t) const override;
  std::string describe() const override;
  const Vec2& center() const { return c_; }
  double radius() const { return R_; }

private:
  Vec2 c_;
  double R_;
  int seg_;
};

class Rectangle : public Geometry {
public:
  Rectangle(Vec2 lo, Vec2 hi, int segment = 0) : lo_(lo), hi_(hi), seg_(segment) {}
  double phi(const Vec2& x) const override;
  Projection project(const Vec2& x) const override;
  std::string describe() const override;

private:
  Vec2 lo_, hi_;
  int seg_;
};

// outer minus inner; inner boundary normals are flipped
class Difference : public Geometry {
public:
  Difference(std::shared_ptr<const Geometry> outer, std::shared_ptr<const Geometry> inner)
      : a_(std::move(outer)), b_(std::move(inner)) {}
  double phi(const Vec2& x) const override { return std::min(a_->phi(x), -b_->phi(x)); }
  Projection project(const Vec2& x) const override;
  Vec2 arc_point(const Vec2& a, const Vec2& b, double t) const override;
  std::string describe() const override;

private:
  std::shared_ptr<const Geometry> a_, b_;
};

// bisection for the zero of phi on the segment [a,b]; phi(a), phi(b) must differ in sign
Vec2 find_crossing(const Geometry& g, const Vec2& a, const Vec2& b);

} // namespace sbm
