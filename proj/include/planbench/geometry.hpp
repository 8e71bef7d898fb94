#pragma once

#include <cmath>
#include <string>

namespace planbench {

// Slack used for all boundary decisions.  A footprint that merely touches a
// region border still counts as contained, and two footprints that merely
// touch each other do not count as overlapping.
inline constexpr double kGeoEps = 1e-6;

// Planar pose.  theta is stored normalized to (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool operator==(const Pose2D&) const = default;
};

// Maps an arbitrary angle into (-pi, pi].
double normalize_angle(double theta);

// Returns the pose with theta normalized to (-pi, pi].
Pose2D normalized(const Pose2D& pose);

// Convex footprint of an object or region: an axis-symmetric rectangle
// (half extents, rotated by the owning pose) or a circle.
struct Footprint {
  enum class Shape { rectangle, circle };

  Shape shape = Shape::rectangle;
  double half_x = 0.0;  // rectangle only
  double half_y = 0.0;  // rectangle only
  double radius = 0.0;  // circle only

  static Footprint rect(double half_x, double half_y);
  static Footprint circle(double radius);

  // Radius of the smallest origin-centered circle enclosing the footprint.
  double circumradius() const;

  bool operator==(const Footprint&) const = default;
};

// Axis-aligned bounds, used for the workspace.
struct Aabb {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool operator==(const Aabb&) const = default;
};

// True when `inner` posed at `inner_pose` lies entirely inside `outer` posed
// at `outer_pose`, allowing kGeoEps of boundary slack (touching counts).
bool shape_contains(const Pose2D& outer_pose, const Footprint& outer,
                    const Pose2D& inner_pose, const Footprint& inner);

// True when the two footprints share interior area beyond kGeoEps of
// penetration (touching, or a gap, counts as no overlap).
bool shapes_overlap(const Pose2D& a_pose, const Footprint& a,
                    const Pose2D& b_pose, const Footprint& b);

// True when the point lies inside (or within kGeoEps of) the footprint.
bool point_in_shape(const Pose2D& pose, const Footprint& shape, double px,
                    double py);

// Signed distance from the point to the footprint boundary, negative inside.
// Used by sampling-based cross checks and the workspace containment test.
double signed_distance(const Pose2D& pose, const Footprint& shape, double px,
                       double py);

}  // namespace planbench
