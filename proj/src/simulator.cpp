#include "dhocbf/simulator.hpp"

#include <cmath>
#include <tuple>

#include "dhocbf/errors.hpp"

namespace dhocbf {
namespace {

ControlInput reference_control(const Scenario& s, const ReferenceTrajectory& ref,
                               const EgoState& ego, double t,
                               const std::vector<ObstacleState>& obstacles) {
  if (s.reference.provider == ReferenceSpec::Provider::idm) {
    return idm_reference_control(ego, ref, t, obstacles, s.reference.idm,
                                 s.reference.gains);
  }
  return pd_tracking_control(ego, ref, t, s.reference.gains);
}

Scenario preset_base(BarrierMode mode, const PresetOverrides& o) {
  Scenario s;
  s.ego_init = {0.0, 0.0, 6.0, 0.0};
  s.ego_shape = ShapeSpec::make_point();
  s.reference.provider = ReferenceSpec::Provider::track;
  s.reference.source = ReferenceSpec::Source::line;
  s.reference.line_start = {0.0, 0.0};
  s.reference.line_velocity = {6.0, 0.0};
  s.filter.mode = mode;
  // The validity experiments evaluate the barrier against every obstacle from
  // t = 0, so the presets sense the whole scene instead of the 8 m default.
  s.filter.sensory_radius = 40.0;
  s.filter.params.beta1 = o.beta1.value_or(1.0);
  s.filter.params.beta2 = o.beta2.value_or(1.0);
  if (o.variant) s.filter.params.variant = *o.variant;
  if (o.policy) s.filter.policy = *o.policy;
  s.filter.margin = o.margin.value_or(0.0);
  s.dt = o.dt.value_or(0.1);
  s.t_end = o.t_end.value_or(10.0);
  s.seed = o.seed.value_or(0);
  return s;
}

ObstacleProfile circle_obstacle(std::string id, double radius, Vec2 pos,
                                std::vector<VelocitySegment> segments) {
  ObstacleProfile p;
  p.id = std::move(id);
  p.shape = ShapeSpec::make_circle(radius);
  p.initial_position = pos;
  p.segments = std::move(segments);
  return p;
}

std::string trim_trailing_zeros(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  for (char& c : s) {
    if (c == '.') c = '_';
  }
  return s;
}

}  // namespace

void validate_scenario(const Scenario& s) {
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) {
    throw ValidationError("scenario '" + s.name + "': dt must be > 0");
  }
  if (!(s.t_end > 0.0) || !std::isfinite(s.t_end)) {
    throw ValidationError("scenario '" + s.name + "': t_end must be > 0");
  }
  if (!std::isfinite(s.ego_init.x) || !std::isfinite(s.ego_init.y) ||
      !std::isfinite(s.ego_init.vx) || !std::isfinite(s.ego_init.vy)) {
    throw ValidationError("scenario '" + s.name + "': non-finite ego state");
  }
  validate_shape(s.ego_shape);
  for (const ObstacleProfile& p : s.obstacles) validate_profile(p);
  if (s.reference.source != ReferenceSpec::Source::line) {
    validate_trajectory(s.reference.trajectory);
  } else if (!is_finite(s.reference.line_start) ||
             !is_finite(s.reference.line_velocity)) {
    throw ValidationError("scenario '" + s.name + "': non-finite reference line");
  }
  if (s.reference.provider == ReferenceSpec::Provider::idm) {
    validate_idm_params(s.reference.idm);
  }
  if (!(s.filter.sensory_radius > 0.0)) {
    throw ValidationError("scenario '" + s.name + "': sensory radius must be > 0");
  }
  if (s.filter.margin < 0.0) {
    throw ValidationError("scenario '" + s.name + "': margin must be >= 0");
  }
  if (s.filter.box.lo.x > s.filter.box.hi.x || s.filter.box.lo.y > s.filter.box.hi.y) {
    throw ValidationError("scenario '" + s.name + "': empty control box");
  }
}

ReferenceTrajectory materialize_reference(const ReferenceSpec& spec, double t_end) {
  if (spec.source != ReferenceSpec::Source::line) return spec.trajectory;
  ReferenceTrajectory ref;
  ref.samples.push_back({0.0, spec.line_start, spec.line_velocity});
  ref.samples.push_back(
      {t_end, spec.line_start + t_end * spec.line_velocity, spec.line_velocity});
  return ref;
}

std::vector<TraceRecord> run_scenario(const Scenario& s) {
  validate_scenario(s);
  const ReferenceTrajectory ref = materialize_reference(s.reference, s.t_end);
  validate_trajectory(ref);

  FilterConfig filter = s.filter;
  filter.ego_shape = s.ego_shape;

  const long steps = std::max<long>(1, static_cast<long>(std::ceil(s.t_end / s.dt - 1e-12)));
  std::vector<TraceRecord> trace;
  trace.reserve(steps);

  EgoState ego = s.ego_init;
  for (long k = 0; k < steps; ++k) {
    const double t = k * s.dt;

    std::vector<ObstacleState> obstacles;
    obstacles.reserve(s.obstacles.size());
    for (const ObstacleProfile& p : s.obstacles) {
      obstacles.push_back(obstacle_state_at(p, t));
    }

    const ControlInput u_ref = reference_control(s, ref, ego, t, obstacles);
    const auto infos = evaluate_obstacle_constraints(ego, obstacles, filter);

    ControlInput u_applied;
    QPResult qp;
    try {
      std::tie(u_applied, qp) = filter_with_constraints(u_ref, ego, infos, filter);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("scenario '" + s.name + "': " + e.what() + " at step " +
                                std::to_string(k) + " (t=" + std::to_string(t) + ")",
                            k);
    }

    TraceRecord rec;
    rec.t = t;
    rec.ego = ego;
    rec.u_ref = u_ref;
    rec.u_applied = u_applied;
    rec.qp_status = qp.status;
    rec.active_set = qp.active_set;
    rec.slack = qp.slack;
    for (const ObstacleConstraintInfo& info : infos) {
      rec.obstacles.push_back({info.id, info.surface_distance, info.d_safe, info.h,
                               dot(info.row.a, u_applied.vec()) - info.row.b,
                               info.in_range});
    }
    trace.push_back(std::move(rec));

    ego = step_ego(ego, u_applied, s.dt);
  }
  return trace;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"speed_sweep", "radius_sweep",
                                              "perturbation", "multi_obstacle"};
  return names;
}

std::vector<Scenario> build_preset(const std::string& name, BarrierMode mode,
                                   const PresetOverrides& overrides) {
  std::vector<Scenario> scenarios;

  if (name == "speed_sweep") {
    for (const double speed : {0.0, 1.0, 3.0}) {
      Scenario s = preset_base(mode, overrides);
      s.name = "speed_sweep_v" + trim_trailing_zeros(speed);
      s.obstacles.push_back(
          circle_obstacle("obs1", 1.0, {15.0, 0.0}, {{0.0, {speed, 0.0}}}));
      scenarios.push_back(std::move(s));
    }
    return scenarios;
  }

  if (name == "radius_sweep") {
    for (const double radius : {0.5, 1.0, 1.5, 2.0}) {
      Scenario s = preset_base(mode, overrides);
      s.name = "radius_sweep_r" + trim_trailing_zeros(radius);
      s.obstacles.push_back(
          circle_obstacle("obs1", radius, {15.0, 0.0}, {{0.0, {2.0, 0.0}}}));
      scenarios.push_back(std::move(s));
    }
    return scenarios;
  }

  if (name == "perturbation") {
    Scenario s = preset_base(mode, overrides);
    if (!overrides.t_end) s.t_end = 12.0;
    const double switch_time = s.t_end / 2.0;
    s.name = "perturbation";
    // Slightly off the reference line so the ego rounds the obstacle instead
    // of stalling head-on at the barrier boundary when the switch hits.
    s.obstacles.push_back(circle_obstacle(
        "obs1", 1.0, {34.0, 0.5},
        {{0.0, {0.0, 0.0}}, {switch_time, {-1.0, 0.0}}}));
    scenarios.push_back(std::move(s));
    return scenarios;
  }

  if (name == "multi_obstacle") {
    Scenario s = preset_base(mode, overrides);
    s.name = "multi_obstacle";
    s.obstacles.push_back(
        circle_obstacle("obs1", 1.0, {12.0, 0.6}, {{0.0, {1.0, 0.0}}}));
    s.obstacles.push_back(
        circle_obstacle("obs2", 0.8, {22.0, -0.5}, {{0.0, {2.0, 0.0}}}));
    s.obstacles.push_back(
        circle_obstacle("obs3", 1.2, {32.0, 0.7}, {{0.0, {0.0, 0.0}}}));
    scenarios.push_back(std::move(s));
    return scenarios;
  }

  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace dhocbf
