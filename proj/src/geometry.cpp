#include "planbench/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace planbench {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 rotate(double c, double s, double x, double y) {
  return {c * x - s * y, s * x + c * y};
}

// World-frame corners of a rectangle footprint.
std::array<Vec2, 4> rect_corners(const Pose2D& pose, const Footprint& fp) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  std::array<Vec2, 4> out;
  int i = 0;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Vec2 r = rotate(c, s, sx * fp.half_x, sy * fp.half_y);
      out[i++] = {pose.x + r.x, pose.y + r.y};
    }
  }
  return out;
}

// Transforms a world point into the local frame of `pose`.
Vec2 to_local(const Pose2D& pose, double px, double py) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double dx = px - pose.x;
  const double dy = py - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

// Projection radius of a rectangle onto a world-frame unit axis.
double rect_extent(const Pose2D& pose, const Footprint& fp, const Vec2& axis) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const Vec2 ux = {c, s};    // local +x in world frame
  const Vec2 uy = {-s, c};   // local +y in world frame
  return fp.half_x * std::abs(axis.x * ux.x + axis.y * ux.y) +
         fp.half_y * std::abs(axis.x * uy.x + axis.y * uy.y);
}

bool rects_overlap(const Pose2D& ap, const Footprint& a, const Pose2D& bp,
                   const Footprint& b) {
  // Separating-axis test over both rectangles' edge normals.  A pair overlaps
  // only when the projected intervals interpenetrate by more than kGeoEps on
  // every axis.
  const Vec2 d = {bp.x - ap.x, bp.y - ap.y};
  const Pose2D* poses[2] = {&ap, &bp};
  for (const Pose2D* p : poses) {
    const double c = std::cos(p->theta);
    const double s = std::sin(p->theta);
    const Vec2 axes[2] = {{c, s}, {-s, c}};
    for (const Vec2& axis : axes) {
      const double dist = std::abs(d.x * axis.x + d.y * axis.y);
      const double reach =
          rect_extent(ap, a, axis) + rect_extent(bp, b, axis);
      if (dist >= reach - kGeoEps) return false;
    }
  }
  return true;
}

bool rect_circle_overlap(const Pose2D& rp, const Footprint& rect,
                         const Pose2D& cp, const Footprint& circ) {
  const Vec2 local = to_local(rp, cp.x, cp.y);
  const double qx = std::clamp(local.x, -rect.half_x, rect.half_x);
  const double qy = std::clamp(local.y, -rect.half_y, rect.half_y);
  const double dx = local.x - qx;
  const double dy = local.y - qy;
  return std::sqrt(dx * dx + dy * dy) < circ.radius - kGeoEps;
}

}  // namespace

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) return theta;
  double t = std::fmod(theta, 2.0 * kPi);
  if (t <= -kPi) t += 2.0 * kPi;
  if (t > kPi) t -= 2.0 * kPi;
  return t;
}

Pose2D normalized(const Pose2D& pose) {
  return {pose.x, pose.y, normalize_angle(pose.theta)};
}

Footprint Footprint::rect(double half_x, double half_y) {
  Footprint fp;
  fp.shape = Shape::rectangle;
  fp.half_x = half_x;
  fp.half_y = half_y;
  return fp;
}

Footprint Footprint::circle(double radius) {
  Footprint fp;
  fp.shape = Shape::circle;
  fp.radius = radius;
  return fp;
}

double Footprint::circumradius() const {
  if (shape == Shape::circle) return radius;
  return std::sqrt(half_x * half_x + half_y * half_y);
}

bool shape_contains(const Pose2D& outer_pose, const Footprint& outer,
                    const Pose2D& inner_pose, const Footprint& inner) {
  if (outer.shape == Footprint::Shape::rectangle) {
    if (inner.shape == Footprint::Shape::rectangle) {
      for (const auto& corner : rect_corners(inner_pose, inner)) {
        const Vec2 local = to_local(outer_pose, corner.x, corner.y);
        if (std::abs(local.x) > outer.half_x + kGeoEps) return false;
        if (std::abs(local.y) > outer.half_y + kGeoEps) return false;
      }
      return true;
    }
    const Vec2 local = to_local(outer_pose, inner_pose.x, inner_pose.y);
    return std::abs(local.x) <= outer.half_x - inner.radius + kGeoEps &&
           std::abs(local.y) <= outer.half_y - inner.radius + kGeoEps;
  }
  // Circular outer region.
  if (inner.shape == Footprint::Shape::rectangle) {
    for (const auto& corner : rect_corners(inner_pose, inner)) {
      const double dx = corner.x - outer_pose.x;
      const double dy = corner.y - outer_pose.y;
      if (std::sqrt(dx * dx + dy * dy) > outer.radius + kGeoEps) return false;
    }
    return true;
  }
  const double dx = inner_pose.x - outer_pose.x;
  const double dy = inner_pose.y - outer_pose.y;
  return std::sqrt(dx * dx + dy * dy) + inner.radius <=
         outer.radius + kGeoEps;
}

bool shapes_overlap(const Pose2D& a_pose, const Footprint& a,
                    const Pose2D& b_pose, const Footprint& b) {
  const bool a_rect = a.shape == Footprint::Shape::rectangle;
  const bool b_rect = b.shape == Footprint::Shape::rectangle;
  if (a_rect && b_rect) return rects_overlap(a_pose, a, b_pose, b);
  if (a_rect && !b_rect) return rect_circle_overlap(a_pose, a, b_pose, b);
  if (!a_rect && b_rect) return rect_circle_overlap(b_pose, b, a_pose, a);
  const double dx = b_pose.x - a_pose.x;
  const double dy = b_pose.y - a_pose.y;
  return std::sqrt(dx * dx + dy * dy) < a.radius + b.radius - kGeoEps;
}

bool point_in_shape(const Pose2D& pose, const Footprint& shape, double px,
                    double py) {
  return signed_distance(pose, shape, px, py) <= kGeoEps;
}

double signed_distance(const Pose2D& pose, const Footprint& shape, double px,
                       double py) {
  if (shape.shape == Footprint::Shape::circle) {
    const double dx = px - pose.x;
    const double dy = py - pose.y;
    return std::sqrt(dx * dx + dy * dy) - shape.radius;
  }
  const Vec2 local = to_local(pose, px, py);
  const double dx = std::abs(local.x) - shape.half_x;
  const double dy = std::abs(local.y) - shape.half_y;
  if (dx <= 0.0 && dy <= 0.0) return std::max(dx, dy);
  const double cx = std::max(dx, 0.0);
  const double cy = std::max(dy, 0.0);
  return std::sqrt(cx * cx + cy * cy);
}

}  // namespace planbench
