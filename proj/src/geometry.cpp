#include "dhocbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dhocbf/errors.hpp"

namespace dhocbf {
namespace {

constexpr double kCoincidentCentersEps = 1e-12;

// Interval of the box's corner projections onto a unit axis.
struct Interval {
  double lo;
  double hi;
};

Interval project_onto_axis(const std::array<Vec2, 4>& corners, Vec2 axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec2& c : corners) {
    const double p = dot(c, axis);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return {lo, hi};
}

double overlap_length(Interval a, Interval b) {
  return std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
}

std::array<Vec2, 2> box_axes(const OrientedBox& b) {
  const Vec2 along = rotated({1.0, 0.0}, b.heading);
  return {along, Vec2{-along.y, along.x}};
}

// Minimum translation depth over the four face normals; negative when the
// boxes are separated along some axis.
double sat_min_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = rect_corners(a);
  const auto cb = rect_corners(b);
  double depth = std::numeric_limits<double>::infinity();
  for (const OrientedBox* box : {&a, &b}) {
    for (const Vec2& axis : box_axes(*box)) {
      const double ov = overlap_length(project_onto_axis(ca, axis),
                                       project_onto_axis(cb, axis));
      depth = std::min(depth, ov);
      if (depth < 0.0) return depth;
    }
  }
  return depth;
}

ClosestPair circle_circle(Vec2 ca, double ra, Vec2 cb, double rb) {
  ClosestPair out;
  const Vec2 d = cb - ca;
  const double center_dist = norm(d);
  Vec2 dir{1.0, 0.0};
  if (center_dist > kCoincidentCentersEps) dir = d / center_dist;

  const double gap = center_dist - ra - rb;
  if (gap >= 0.0) {
    out.distance = gap;
    out.point_on_a = ca + ra * dir;
    out.point_on_b = cb - rb * dir;
  } else {
    out.penetration = -gap;
    out.point_on_a = out.point_on_b = 0.5 * (ca + cb);
  }
  return out;
}

ClosestPair circle_box(Vec2 center, double radius, const OrientedBox& box) {
  const auto corners = rect_corners(box);

  // Closest boundary point of the box to the circle center.
  double best = std::numeric_limits<double>::infinity();
  Vec2 p_surf;
  for (int i = 0; i < 4; ++i) {
    const auto res =
        point_segment_closest(center, corners[i], corners[(i + 1) % 4]);
    if (res.distance < best) {
      best = res.distance;
      p_surf = res.p_surf;
    }
  }

  // Inside test in the box frame.
  const Vec2 local = rotated(center - box.center, -box.heading);
  const bool inside = std::abs(local.x) <= 0.5 * box.length &&
                      std::abs(local.y) <= 0.5 * box.width;

  ClosestPair out;
  if (inside) {
    out.penetration = best + radius;
    out.point_on_a = out.point_on_b = 0.5 * (center + box.center);
    return out;
  }
  const double gap = best - radius;
  if (gap < 0.0) {
    out.penetration = -gap;
    out.point_on_a = out.point_on_b = 0.5 * (center + box.center);
    return out;
  }
  Vec2 dir{1.0, 0.0};
  if (best > kCoincidentCentersEps) dir = (p_surf - center) / best;
  out.distance = gap;
  out.point_on_a = center + radius * dir;
  out.point_on_b = p_surf;
  return out;
}

ClosestPair box_box(const OrientedBox& a, const OrientedBox& b) {
  ClosestPair out;
  const double depth = sat_min_overlap(a, b);
  if (depth >= 0.0) {
    out.penetration = depth;
    out.point_on_a = out.point_on_b = 0.5 * (a.center + b.center);
    return out;
  }

  const auto ca = rect_corners(a);
  const auto cb = rect_corners(b);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best,
                      point_segment_closest(ca[i], cb[j], cb[(j + 1) % 4]).distance);
      best = std::min(best,
                      point_segment_closest(cb[i], ca[j], ca[(j + 1) % 4]).distance);
    }
  }

  // Parallel edges admit many closest pairs; averaging the achieving pairs
  // gives the midpoint of the contact strip and keeps the swap symmetry.
  Vec2 sum_a;
  Vec2 sum_b;
  int hits = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      auto res = point_segment_closest(ca[i], cb[j], cb[(j + 1) % 4]);
      if (res.distance <= best + 1e-12) {
        sum_a = sum_a + ca[i];
        sum_b = sum_b + res.p_surf;
        ++hits;
      }
      res = point_segment_closest(cb[i], ca[j], ca[(j + 1) % 4]);
      if (res.distance <= best + 1e-12) {
        sum_a = sum_a + res.p_surf;
        sum_b = sum_b + cb[i];
        ++hits;
      }
    }
  }
  out.point_on_a = sum_a / hits;
  out.point_on_b = sum_b / hits;
  out.distance = best;
  return out;
}

// Boundary sample points at uniform arc spacing, for the reference
// measurement only.
void boundary_samples(const PlacedShape& s, int n, std::vector<Vec2>& out) {
  out.clear();
  if (s.shape.kind == ShapeSpec::Kind::rectangle) {
    const auto corners = rect_corners(s.box());
    double perimeter = 0.0;
    std::array<double, 4> edge_len{};
    for (int i = 0; i < 4; ++i) {
      edge_len[i] = norm(corners[(i + 1) % 4] - corners[i]);
      perimeter += edge_len[i];
    }
    const double step = perimeter / n;
    int edge = 0;
    double edge_start = 0.0;
    for (int k = 0; k < n; ++k) {
      const double arc = k * step;
      while (edge < 3 && arc > edge_start + edge_len[edge]) {
        edge_start += edge_len[edge];
        ++edge;
      }
      const double t = (arc - edge_start) / edge_len[edge];
      out.push_back(corners[edge] + t * (corners[(edge + 1) % 4] - corners[edge]));
    }
    return;
  }
  if (s.shape.kind == ShapeSpec::Kind::circle && s.shape.radius > 0.0) {
    const double two_pi = 2.0 * std::acos(-1.0);
    for (int k = 0; k < n; ++k) {
      const double ang = two_pi * k / n;
      out.push_back(s.position +
                    Vec2{s.shape.radius * std::cos(ang), s.shape.radius * std::sin(ang)});
    }
    return;
  }
  out.push_back(s.position);  // point
}

// Exact distance from a sample point to the other shape's boundary, written
// locally so the reference path does not share code with shape_min_distance.
double point_to_boundary(Vec2 p, const PlacedShape& s) {
  if (s.shape.kind != ShapeSpec::Kind::rectangle) {
    return std::abs(norm(p - s.position) - s.shape.radius);
  }
  const auto corners = rect_corners(s.box());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Vec2 a = corners[i];
    const Vec2 e = corners[(i + 1) % 4] - a;
    double t = dot(p - a, e) / norm_sq(e);
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, norm(p - (a + t * e)));
  }
  return best;
}

}  // namespace

double ShapeSpec::bounding_radius() const {
  if (kind == Kind::rectangle) return 0.5 * std::hypot(width, length);
  return radius;
}

void validate_shape(const ShapeSpec& shape) {
  switch (shape.kind) {
    case ShapeSpec::Kind::point:
      return;
    case ShapeSpec::Kind::circle:
      if (!std::isfinite(shape.radius) || shape.radius < 0.0) {
        throw ValidationError("circle radius must be finite and >= 0");
      }
      return;
    case ShapeSpec::Kind::rectangle:
      if (!std::isfinite(shape.width) || !std::isfinite(shape.length) ||
          shape.width <= 0.0 || shape.length <= 0.0) {
        throw ValidationError("rectangle sides must be finite and > 0");
      }
      return;
  }
  throw ValidationError("unknown shape kind");
}

std::array<Vec2, 4> rect_corners(const OrientedBox& b) {
  const double hl = 0.5 * b.length;
  const double hw = 0.5 * b.width;
  return {
      b.center + rotated({+hl, +hw}, b.heading),
      b.center + rotated({-hl, +hw}, b.heading),
      b.center + rotated({-hl, -hw}, b.heading),
      b.center + rotated({+hl, -hw}, b.heading),
  };
}

PointSegmentResult point_segment_closest(Vec2 b1, Vec2 a1, Vec2 a2) {
  PointSegmentResult out;
  const Vec2 seg = a2 - a1;
  const double len_sq = norm_sq(seg);
  if (len_sq == 0.0) {
    out.r = 0.0;
    out.p_surf = a1;
    out.distance = norm(b1 - a1);
    return out;
  }
  out.r = dot(b1 - a1, seg) / len_sq;
  if (out.r <= 0.0) {
    out.p_surf = a1;
  } else if (out.r >= 1.0) {
    out.p_surf = a2;
  } else {
    out.p_surf = a1 + out.r * seg;
  }
  out.distance = norm(b1 - out.p_surf);
  return out;
}

double corner_edge_distance(Vec2 b1, Vec2 a1, Vec2 a2) {
  return point_segment_closest(b1, a1, a2).distance;
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  return sat_min_overlap(a, b) >= 0.0;
}

ClosestPair shape_min_distance(const PlacedShape& a, const PlacedShape& b) {
  const bool a_circ = a.shape.is_circular();
  const bool b_circ = b.shape.is_circular();
  if (a_circ && b_circ) {
    return circle_circle(a.position, a.shape.radius, b.position, b.shape.radius);
  }
  if (a_circ) {
    ClosestPair pair = circle_box(a.position, a.shape.radius, b.box());
    return pair;
  }
  if (b_circ) {
    ClosestPair pair = circle_box(b.position, b.shape.radius, a.box());
    std::swap(pair.point_on_a, pair.point_on_b);
    return pair;
  }
  return box_box(a.box(), b.box());
}

double dynamic_safe_distance(const PlacedShape& a, const PlacedShape& b,
                             double margin) {
  const Vec2 d = b.position - a.position;
  const double center_dist = norm(d);
  if (center_dist <= kCoincidentCentersEps) {
    // Degenerate pose; return a value that forces a barrier violation.
    const double extent =
        std::max(a.shape.bounding_radius(), b.shape.bounding_radius());
    return center_dist + extent + margin;
  }

  if (a.shape.is_circular() && b.shape.is_circular()) {
    return a.shape.radius + b.shape.radius + margin;
  }

  const ClosestPair pair = shape_min_distance(a, b);
  if (pair.penetration > 0.0) {
    return center_dist + pair.penetration + margin;
  }
  const Vec2 dir = d / center_dist;
  const double gap = std::max(0.0, dot(pair.point_on_b - pair.point_on_a, dir));
  return center_dist - gap + margin;
}

double sampled_boundary_distance(const PlacedShape& a, const PlacedShape& b,
                                 int samples_per_perimeter) {
  static thread_local std::vector<Vec2> samples;
  double best = std::numeric_limits<double>::infinity();
  boundary_samples(a, samples_per_perimeter, samples);
  for (const Vec2& p : samples) best = std::min(best, point_to_boundary(p, b));
  boundary_samples(b, samples_per_perimeter, samples);
  for (const Vec2& p : samples) best = std::min(best, point_to_boundary(p, a));
  return best;
}

}  // namespace dhocbf
