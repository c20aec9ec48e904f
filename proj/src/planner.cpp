#include "dhocbf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dhocbf/errors.hpp"

namespace dhocbf {
namespace {

constexpr double kLeaderLateralRange = 8.0;              // [m]
constexpr double kLeaderHeadingTol = 15.0 * M_PI / 180.0;

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

void validate_trajectory(const ReferenceTrajectory& ref) {
  if (ref.samples.empty()) {
    throw ValidationError("reference trajectory has no samples");
  }
  double prev_t = -std::numeric_limits<double>::infinity();
  for (const TrajectorySample& s : ref.samples) {
    if (!std::isfinite(s.t) || !is_finite(s.position) || !is_finite(s.velocity)) {
      throw ValidationError("reference trajectory has non-finite sample");
    }
    if (s.t <= prev_t) {
      throw ValidationError("reference trajectory times must strictly increase");
    }
    prev_t = s.t;
  }
}

ReferencePoint sample_reference(const ReferenceTrajectory& ref, double t) {
  const auto& s = ref.samples;
  if (t < s.front().t || s.size() == 1 || t > s.back().t) {
    const TrajectorySample& end = t < s.front().t ? s.front() : s.back();
    return {end.position, {0.0, 0.0}, {0.0, 0.0}};
  }
  // Active segment: last i with s[i].t <= t, capped so t == back().t lands in
  // the final segment.
  std::size_t i = 0;
  while (i + 2 < s.size() && s[i + 1].t <= t) ++i;
  const TrajectorySample& a = s[i];
  const TrajectorySample& b = s[i + 1];
  const double span = b.t - a.t;
  const double tau = (t - a.t) / span;
  ReferencePoint out;
  out.position = a.position + tau * (b.position - a.position);
  out.velocity = a.velocity + tau * (b.velocity - a.velocity);
  out.accel_ff = (b.velocity - a.velocity) / span;
  return out;
}

ControlInput pd_tracking_control(const EgoState& ego, const ReferenceTrajectory& ref,
                                 double t, const PDGains& gains) {
  validate_trajectory(ref);
  const ReferencePoint rp = sample_reference(ref, t);
  const Vec2 u = gains.kp * (rp.position - ego.position()) +
                 gains.kd * (rp.velocity - ego.velocity()) + rp.accel_ff;
  return {u.x, u.y};
}

ControlInput replay_control(const EgoState& ego, const ReferenceTrajectory& recorded,
                            double t, const PDGains& gains) {
  return pd_tracking_control(ego, recorded, t, gains);
}

void validate_idm_params(const IDMParams& p) {
  for (const double v : {p.v0, p.s0, p.t_headway, p.a_max, p.b_comfort, p.delta,
                         p.hard_brake_factor}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("IDM parameters must all be positive and finite");
    }
  }
}

PathProjection project_onto_path(const ReferenceTrajectory& path, Vec2 p) {
  const auto& s = path.samples;
  PathProjection best;
  best.lateral_distance = std::numeric_limits<double>::infinity();

  double arc_before = 0.0;
  bool any_segment = false;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const Vec2 a = s[i].position;
    const Vec2 seg = s[i + 1].position - a;
    const double len = norm(seg);
    if (len == 0.0) continue;
    any_segment = true;
    const double r = std::clamp(dot(p - a, seg) / (len * len), 0.0, 1.0);
    const Vec2 foot = a + r * seg;
    const double d = norm(p - foot);
    if (d < best.lateral_distance) {
      best.lateral_distance = d;
      best.arc_length = arc_before + r * len;
      best.tangent = seg / len;
    }
    arc_before += len;
  }
  if (!any_segment) {
    // Degenerate path (single point or all samples coincident).
    best.lateral_distance = norm(p - s.front().position);
    best.arc_length = 0.0;
    best.tangent = {1.0, 0.0};
  }
  return best;
}

std::optional<ObstacleState> idm_select_leader(
    const EgoState& ego, const ReferenceTrajectory& planned_path,
    const std::vector<ObstacleState>& others) {
  validate_trajectory(planned_path);
  const PathProjection ego_proj = project_onto_path(planned_path, ego.position());

  std::optional<ObstacleState> leader;
  double best_ahead = std::numeric_limits<double>::infinity();
  for (const ObstacleState& obs : others) {
    const PathProjection proj = project_onto_path(planned_path, obs.position);
    if (proj.lateral_distance > kLeaderLateralRange) continue;
    const double path_heading = std::atan2(proj.tangent.y, proj.tangent.x);
    if (std::abs(wrap_angle(obs.heading - path_heading)) >= kLeaderHeadingTol) {
      continue;
    }
    const double ahead = proj.arc_length - ego_proj.arc_length;
    if (ahead <= 0.0) continue;
    if (ahead < best_ahead) {
      best_ahead = ahead;
      leader = obs;
    }
  }
  return leader;
}

double idm_acceleration(double v, double gap, double dv, const IDMParams& p) {
  const double brake_floor = -p.b_comfort * p.hard_brake_factor;
  if (!(gap > 0.0)) return brake_floor;
  const double s_star =
      p.s0 + v * p.t_headway + v * dv / (2.0 * std::sqrt(p.a_max * p.b_comfort));
  const double ratio = s_star / gap;  // 0 on a free road (gap = +inf)
  const double a = p.a_max * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
  return std::clamp(a, brake_floor, p.a_max);
}

ControlInput idm_reference_control(const EgoState& ego,
                                   const ReferenceTrajectory& planned_path,
                                   double t,
                                   const std::vector<ObstacleState>& others,
                                   const IDMParams& idm, const PDGains& gains) {
  const PathProjection ego_proj = project_onto_path(planned_path, ego.position());
  const Vec2 tangent = ego_proj.tangent;
  const double v_long = dot(ego.velocity(), tangent);

  double accel;
  const std::optional<ObstacleState> leader =
      idm_select_leader(ego, planned_path, others);
  if (leader) {
    const PathProjection leader_proj = project_onto_path(planned_path, leader->position);
    const double gap = leader_proj.arc_length - ego_proj.arc_length;
    const double dv = v_long - dot(leader->velocity, tangent);
    accel = idm_acceleration(v_long, gap, dv, idm);
  } else {
    accel = idm_acceleration(v_long, std::numeric_limits<double>::infinity(), 0.0, idm);
  }

  const ControlInput pd = pd_tracking_control(ego, planned_path, t, gains);
  const Vec2 lateral = pd.vec() - dot(pd.vec(), tangent) * tangent;
  const Vec2 u = accel * tangent + lateral;
  return {u.x, u.y};
}

}  // namespace dhocbf
