#pragma once

#include <array>
#include <string>

#include "dhocbf/vec2.hpp"

namespace dhocbf {

/// Collision footprint of a vehicle or obstacle.
/// A point is treated everywhere as a circle of radius zero.
struct ShapeSpec {
  enum class Kind { point, circle, rectangle };

  Kind kind = Kind::point;
  double radius = 0.0;  // circle [m]
  double width = 0.0;   // rectangle, lateral extent [m]
  double length = 0.0;  // rectangle, extent along the heading axis [m]

  static ShapeSpec make_point() { return {}; }
  static ShapeSpec make_circle(double r) { return {Kind::circle, r, 0.0, 0.0}; }
  static ShapeSpec make_rectangle(double w, double l) {
    return {Kind::rectangle, 0.0, w, l};
  }

  bool is_circular() const { return kind != Kind::rectangle; }

  /// Radius of the smallest circle containing the shape.
  double bounding_radius() const;
};

/// Throws ValidationError if the shape violates its invariants
/// (negative radius, non-positive rectangle sides, non-finite values).
void validate_shape(const ShapeSpec& shape);

/// Rectangle with an arbitrary heading. length runs along the heading axis,
/// width across it.
struct OrientedBox {
  Vec2 center;
  double width = 0.0;
  double length = 0.0;
  double heading = 0.0;  // [rad]
};

/// A shape placed in the plane. heading is ignored for circular shapes.
struct PlacedShape {
  ShapeSpec shape;
  Vec2 position;
  double heading = 0.0;

  OrientedBox box() const {
    return {position, shape.width, shape.length, heading};
  }
};

/// The two closest surface points of a shape pair. Exactly one of distance and
/// penetration is positive unless the surfaces touch (then both are zero).
struct ClosestPair {
  Vec2 point_on_a;
  Vec2 point_on_b;
  double distance = 0.0;     // >= 0, surface gap when disjoint
  double penetration = 0.0;  // >= 0, minimum translation depth when overlapping
};

/// Result of projecting a point onto a segment.
struct PointSegmentResult {
  double r = 0.0;   // unclamped projection ratio along a1->a2
  Vec2 p_surf;      // closest point on the segment (clamped)
  double distance = 0.0;
};

/// Corners of the box in counter-clockwise order, starting at
/// center + rotate(+length/2, +width/2).
std::array<Vec2, 4> rect_corners(const OrientedBox& b);

/// Closest point on segment [a1, a2] to point b1. The projection ratio
/// r = (b1-a1)·(a2-a1)/|a2-a1|^2 is clamped to [0, 1] for p_surf.
/// A degenerate segment (a1 == a2) is treated as the point a1 with r = 0.
PointSegmentResult point_segment_closest(Vec2 b1, Vec2 a1, Vec2 a2);

/// Distance from a corner point to an edge segment; the distance field of
/// point_segment_closest.
double corner_edge_distance(Vec2 b1, Vec2 a1, Vec2 a2);

/// Separating-axis overlap test for two oriented boxes.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Minimum surface distance between two placed shapes.
/// Circle pairs are solved along the center line. Rectangle pairs take the
/// minimum over all corner-vs-edge distances in both directions; overlap is
/// detected by a separating-axis test and reported as the minimum translation
/// depth. Circle-vs-rectangle projects the circle center onto the box surface.
ClosestPair shape_min_distance(const PlacedShape& a, const PlacedShape& b);

/// Center-to-center distance at which the two surfaces would touch along the
/// current center line, plus margin. For circular shapes this is
/// r_a + r_b + margin. For rectangles the surface gap between the closest
/// points is projected onto the center line and subtracted from the center
/// distance; overlapping shapes get center distance + penetration + margin so
/// the barrier value goes negative. Coincident centers fall back to
/// center distance + max bounding radius + margin.
double dynamic_safe_distance(const PlacedShape& a, const PlacedShape& b,
                             double margin);

/// Slow reference measurement of the surface distance between two disjoint
/// placed shapes: samples_per_perimeter points on each boundary, each tested
/// against the other boundary. Used by the validate subcommand and tests;
/// never by the control path. Over-estimates the true distance by at most
/// half the sample spacing.
double sampled_boundary_distance(const PlacedShape& a, const PlacedShape& b,
                                 int samples_per_perimeter);

}  // namespace dhocbf
