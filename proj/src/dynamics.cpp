#include "dhocbf/dynamics.hpp"

#include <cmath>

#include "dhocbf/errors.hpp"

namespace dhocbf {

void validate_profile(const ObstacleProfile& p) {
  validate_shape(p.shape);
  if (!is_finite(p.initial_position)) {
    throw ValidationError("obstacle '" + p.id + "': non-finite initial position");
  }
  if (p.segments.empty()) {
    throw ValidationError("obstacle '" + p.id + "': needs at least one velocity segment");
  }
  if (p.segments.front().start_time != 0.0) {
    throw ValidationError("obstacle '" + p.id + "': first segment must start at t=0");
  }
  double prev = -1.0;
  for (const VelocitySegment& seg : p.segments) {
    if (!std::isfinite(seg.start_time) || !is_finite(seg.velocity)) {
      throw ValidationError("obstacle '" + p.id + "': non-finite segment");
    }
    if (seg.start_time <= prev) {
      throw ValidationError("obstacle '" + p.id + "': segment start times must strictly increase");
    }
    prev = seg.start_time;
  }
}

EgoState step_ego(const EgoState& s, const ControlInput& u, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("step_ego: dt must be finite and > 0");
  }
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.vx) ||
      !std::isfinite(s.vy) || !std::isfinite(u.ux) || !std::isfinite(u.uy)) {
    throw ValidationError("step_ego: non-finite state or control");
  }
  EgoState next;
  next.x = s.x + s.vx * dt + 0.5 * u.ux * dt * dt;
  next.y = s.y + s.vy * dt + 0.5 * u.uy * dt * dt;
  next.vx = s.vx + u.ux * dt;
  next.vy = s.vy + u.uy * dt;
  return next;
}

ObstacleState obstacle_state_at(const ObstacleProfile& p, double t) {
  ObstacleState out;
  out.id = p.id;
  out.shape = p.shape;

  Vec2 pos = p.initial_position;
  Vec2 vel;
  double heading = 0.0;
  for (std::size_t i = 0; i < p.segments.size(); ++i) {
    const VelocitySegment& seg = p.segments[i];
    if (seg.start_time > t) break;
    const double seg_end = (i + 1 < p.segments.size())
                               ? std::min(p.segments[i + 1].start_time, t)
                               : t;
    pos = pos + (seg_end - seg.start_time) * seg.velocity;
    vel = seg.velocity;
    if (norm_sq(seg.velocity) > 0.0) {
      heading = std::atan2(seg.velocity.y, seg.velocity.x);
    }
  }

  out.position = pos;
  out.velocity = vel;
  out.heading = heading;
  return out;
}

std::vector<ObstacleState> obstacles_in_range(const EgoState& ego,
                                              const std::vector<ObstacleState>& all,
                                              double radius) {
  const PlacedShape ego_point{ShapeSpec::make_point(), ego.position(), 0.0};
  std::vector<ObstacleState> out;
  for (const ObstacleState& obs : all) {
    const ClosestPair pair = shape_min_distance(ego_point, obs.placed());
    if (pair.distance <= radius) out.push_back(obs);
  }
  return out;
}

}  // namespace dhocbf
