#pragma once

#include <optional>
#include <vector>

#include "dhocbf/dynamics.hpp"
#include "dhocbf/vec2.hpp"

namespace dhocbf {

/// Time-stamped reference sample.
struct TrajectorySample {
  double t = 0.0;  // [s]
  Vec2 position;   // [m]
  Vec2 velocity;   // [m/s]
};

/// Reference trajectory with strictly increasing sample times. References may
/// intersect obstacles; the safety filter handles that downstream.
struct ReferenceTrajectory {
  std::vector<TrajectorySample> samples;
};

/// Throws ValidationError unless the trajectory is nonempty, finite, and has
/// strictly increasing times.
void validate_trajectory(const ReferenceTrajectory& ref);

/// Proportional-derivative tracking gains.
struct PDGains {
  double kp = 2.0;   // [1/s^2]
  double kd = 2.83;  // [1/s], near-critical damping for the default kp
};

/// Interpolated reference state at a query time.
struct ReferencePoint {
  Vec2 position;
  Vec2 velocity;
  Vec2 accel_ff;  // finite-difference acceleration of the active segment
};

/// Linear interpolation between samples. Outside the sampled range the
/// nearest endpoint is held with zero velocity and zero feedforward.
ReferencePoint sample_reference(const ReferenceTrajectory& ref, double t);

/// u = kp (p_ref - p) + kd (v_ref - v) + a_ff. Throws ValidationError on an
/// empty trajectory.
ControlInput pd_tracking_control(const EgoState& ego, const ReferenceTrajectory& ref,
                                 double t, const PDGains& gains);

/// Tracks a recorded trajectory; same contract as pd_tracking_control.
ControlInput replay_control(const EgoState& ego, const ReferenceTrajectory& recorded,
                            double t, const PDGains& gains);

/// Car-following parameters. Defaults are the intersection-driving set:
/// desired speed 9.63 m/s, minimum spacing 2.5 m, desired headway 1.6 s,
/// nominal acceleration 2 m/s^2, comfortable braking 3 m/s^2.
struct IDMParams {
  double v0 = 9.63;       // desired speed [m/s]
  double s0 = 2.5;        // minimum spacing [m]
  double t_headway = 1.6; // desired time headway [s]
  double a_max = 2.0;     // nominal acceleration [m/s^2]
  double b_comfort = 3.0; // comfortable braking deceleration [m/s^2]
  double delta = 4.0;     // free-road exponent
  /// Hard-braking cap as a multiple of b_comfort.
  double hard_brake_factor = 2.0;
};

void validate_idm_params(const IDMParams& p);

/// Projection of a point onto the path polyline.
struct PathProjection {
  double arc_length = 0.0;        // [m] along the path to the projected point
  double lateral_distance = 0.0;  // [m] perpendicular gap to the path
  Vec2 tangent{1.0, 0.0};         // unit path direction at the projection
};

PathProjection project_onto_path(const ReferenceTrajectory& path, Vec2 p);

/// Leader selection: obstacles within 8 m lateral distance of the planned
/// path whose heading is within 15 degrees of the path direction at their
/// projection; the nearest one ahead of the ego along the path wins.
std::optional<ObstacleState> idm_select_leader(
    const EgoState& ego, const ReferenceTrajectory& planned_path,
    const std::vector<ObstacleState>& others);

/// Longitudinal car-following acceleration.
///   a = a_max (1 - (v/v0)^delta - (s*/gap)^2),
///   s* = s0 + v T + v dv / (2 sqrt(a_max b_comfort)),
/// clamped to [-b_comfort * hard_brake_factor, a_max]. Pass gap = +infinity
/// with dv = 0 for a free road; a non-positive gap returns the hard-braking
/// floor.
double idm_acceleration(double v, double gap, double dv, const IDMParams& p);

/// Composed reference control: car-following acceleration along the path
/// direction plus the lateral part of the PD tracker.
ControlInput idm_reference_control(const EgoState& ego,
                                   const ReferenceTrajectory& planned_path,
                                   double t,
                                   const std::vector<ObstacleState>& others,
                                   const IDMParams& idm, const PDGains& gains);

}  // namespace dhocbf
