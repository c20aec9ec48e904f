#include "dhocbf/barrier.hpp"

namespace dhocbf {
namespace {

constexpr double kAdmissibleTol = 1e-9;

// Shared assembly so the static and dynamic rows are computed with identical
// arithmetic; they must agree exactly for a stationary obstacle.
LinearConstraintRow assemble_row(const BarrierEval& ev, const BarrierParams& p,
                                 double drift, double lf_total,
                                 RowSource source) {
  LinearConstraintRow row;
  row.a = -ev.lglf_h;
  row.b = drift + (p.beta1 + p.beta2) * lf_total +
          (BarrierParams::beta1_dot + p.beta1 * p.beta2) * ev.h;
  row.source = std::move(source);
  return row;
}

}  // namespace

std::string RowSource::label() const {
  switch (kind) {
    case Kind::hocbf:
      return "hocbf:" + id;
    case Kind::dhocbf:
      return "dhocbf:" + id;
    case Kind::box:
      return "box:" + id;
  }
  return "?";
}

double barrier_value(const EgoState& ego, const ObstacleState& obs, double d_safe) {
  const double dx = ego.x - obs.position.x;
  const double dy = ego.y - obs.position.y;
  return dx * dx + dy * dy - d_safe * d_safe;
}

BarrierEval lie_derivatives(const EgoState& ego, const ObstacleState& obs,
                            double d_safe, const BarrierParams& p) {
  BarrierEval ev;
  const double dx = ego.x - obs.position.x;
  const double dy = ego.y - obs.position.y;

  ev.h = dx * dx + dy * dy - d_safe * d_safe;
  ev.lf_h = 2.0 * dx * ego.vx + 2.0 * dy * ego.vy;
  ev.lfobs_h = -2.0 * dx * obs.velocity.x - 2.0 * dy * obs.velocity.y;
  ev.lglf_h = {2.0 * dx, 2.0 * dy};
  ev.lf2_h = 2.0 * norm_sq(ego.velocity());
  ev.lfobs2_h = 2.0 * norm_sq(obs.velocity);
  ev.second_order_drift =
      p.variant == BarrierVariant::relative_velocity
          ? 2.0 * norm_sq(ego.velocity() - obs.velocity)
          : ev.lf2_h + ev.lfobs2_h;
  return ev;
}

LinearConstraintRow dhocbf_row(const BarrierEval& ev, const BarrierParams& p,
                               const std::string& obstacle_id) {
  return assemble_row(ev, p, ev.second_order_drift, ev.lf_h + ev.lfobs_h,
                      {RowSource::Kind::dhocbf, obstacle_id});
}

LinearConstraintRow hocbf_row(const BarrierEval& ev, const BarrierParams& p,
                              const std::string& obstacle_id) {
  return assemble_row(ev, p, ev.lf2_h, ev.lf_h,
                      {RowSource::Kind::hocbf, obstacle_id});
}

bool cbf_admissible(const BarrierEval& ev, const ControlInput& u,
                    const BarrierParams& p, BarrierMode mode) {
  const LinearConstraintRow row =
      mode == BarrierMode::dhocbf ? dhocbf_row(ev, p) : hocbf_row(ev, p);
  return dot(row.a, u.vec()) <= row.b + kAdmissibleTol;
}

}  // namespace dhocbf
