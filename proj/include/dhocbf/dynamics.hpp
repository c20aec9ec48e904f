#pragma once

#include <string>
#include <vector>

#include "dhocbf/geometry.hpp"
#include "dhocbf/vec2.hpp"

namespace dhocbf {

/// Planar state of the controlled vehicle: position and velocity.
struct EgoState {
  double x = 0.0;   // [m]
  double y = 0.0;   // [m]
  double vx = 0.0;  // [m/s]
  double vy = 0.0;  // [m/s]

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return {vx, vy}; }
};

/// Acceleration command on the two movement axes.
struct ControlInput {
  double ux = 0.0;  // [m/s^2]
  double uy = 0.0;  // [m/s^2]

  Vec2 vec() const { return {ux, uy}; }
};

/// One piece of an obstacle's piecewise-constant velocity script.
struct VelocitySegment {
  double start_time = 0.0;  // [s]
  Vec2 velocity;            // [m/s]
};

/// Motion script of one surrounding vehicle. The obstacle holds each
/// segment's velocity until the next segment starts; it never accelerates
/// within a segment.
struct ObstacleProfile {
  std::string id;
  ShapeSpec shape;
  Vec2 initial_position;
  std::vector<VelocitySegment> segments;  // start times strictly increasing, first at 0
};

/// Obstacle pose at a query time.
struct ObstacleState {
  std::string id;
  Vec2 position;
  Vec2 velocity;
  ShapeSpec shape;
  double heading = 0.0;  // [rad], held from the last nonzero velocity

  PlacedShape placed() const { return {shape, position, heading}; }
};

/// Throws ValidationError unless the profile has at least one segment, the
/// first segment starts at 0, start times strictly increase, and all values
/// are finite.
void validate_profile(const ObstacleProfile& p);

/// Advance the double-integrator ego state by dt under constant acceleration
/// (exact zero-order-hold update). Throws ValidationError for dt <= 0 or
/// non-finite inputs.
EgoState step_ego(const EgoState& s, const ControlInput& u, double dt);

/// Obstacle pose at time t >= 0: position integrates the segment velocities,
/// velocity is the active segment's, heading follows the velocity direction
/// and is held across zero-velocity segments (initially 0).
ObstacleState obstacle_state_at(const ObstacleProfile& p, double t);

/// Obstacles whose surface distance to the ego position is <= radius
/// (boundary inclusive), in input order. The ego is treated as a point.
std::vector<ObstacleState> obstacles_in_range(const EgoState& ego,
                                              const std::vector<ObstacleState>& all,
                                              double radius);

}  // namespace dhocbf
