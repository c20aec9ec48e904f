#pragma once

#include <string>

#include "dhocbf/dynamics.hpp"
#include "dhocbf/vec2.hpp"

namespace dhocbf {

/// How the second-order drift term of the barrier acceleration is assembled.
/// sum_of_squares uses 2|v|^2 + 2|v_obs|^2; relative_velocity uses the full
/// second derivative 2|v - v_obs|^2, which differs by the cross term
/// -4 v·v_obs and is the tighter constraint in same-direction traffic.
enum class BarrierVariant { sum_of_squares, relative_velocity };

/// Class-K slopes of the second-order barrier condition. Both slopes are
/// linear with constant coefficients; the slope rate beta1_dot is fixed at 0.
struct BarrierParams {
  double beta1 = 1.0;  // [1/s]
  double beta2 = 1.0;  // [1/s]
  BarrierVariant variant = BarrierVariant::relative_velocity;

  static constexpr double beta1_dot = 0.0;  // [1/s^2]
};

/// Which constraint family a row comes from: the static high-order form or
/// the dynamic form with obstacle-motion terms.
enum class BarrierMode { hocbf, dhocbf };

/// Barrier value and its Lie derivatives for one ego/obstacle pair.
///
/// h       = |p - p_obs|^2 - d_safe^2
/// lf_h    = 2 (p - p_obs)·v              (drift along the ego flow)
/// lfobs_h = -2 (p - p_obs)·v_obs         (drift along the obstacle flow)
/// lglf_h  = 2 (p - p_obs)                (control direction)
/// lf2_h   = 2 |v|^2
/// lfobs2_h= 2 |v_obs|^2
struct BarrierEval {
  double h = 0.0;        // [m^2]
  double lf_h = 0.0;     // [m^2/s]
  double lfobs_h = 0.0;  // [m^2/s]
  Vec2 lglf_h;           // [m^2/s^2 per unit control]
  double lf2_h = 0.0;     // [m^2/s^2]
  double lfobs2_h = 0.0;  // [m^2/s^2]
  /// Variant-dependent acceleration drift: lf2_h + lfobs2_h for
  /// sum_of_squares, 2|v - v_obs|^2 for relative_velocity.
  double second_order_drift = 0.0;
};

/// Identifies where a constraint row came from.
struct RowSource {
  enum class Kind { hocbf, dhocbf, box };
  Kind kind = Kind::box;
  std::string id;  // obstacle id, or the box face name

  std::string label() const;
};

/// One half-plane constraint a·u <= b on the control. A zero row direction
/// makes the row vacuous when b >= 0 and infeasible when b < 0.
struct LinearConstraintRow {
  Vec2 a;         // [m^2/s^2 per unit control]
  double b = 0.0;
  RowSource source;
};

/// h = (x - x_obs)^2 + (y - y_obs)^2 - d_safe^2.
double barrier_value(const EgoState& ego, const ObstacleState& obs, double d_safe);

/// All Lie-derivative terms of the barrier for one obstacle. d_safe is
/// treated as constant over the step.
BarrierEval lie_derivatives(const EgoState& ego, const ObstacleState& obs,
                            double d_safe, const BarrierParams& p);

/// Dynamic second-order barrier constraint:
///   -lglf_h·u <= drift + (b1+b2)(lf_h + lfobs_h) + (beta1_dot + b1 b2) h.
LinearConstraintRow dhocbf_row(const BarrierEval& ev, const BarrierParams& p,
                               const std::string& obstacle_id = "");

/// Static baseline: the obstacle-motion terms are dropped and the drift is
/// the ego term 2|v|^2 alone. Identical to dhocbf_row when v_obs = 0.
LinearConstraintRow hocbf_row(const BarrierEval& ev, const BarrierParams& p,
                              const std::string& obstacle_id = "");

/// Membership test for the selected constraint at control u
/// (closed half-plane, absolute tolerance 1e-9 on the residual).
bool cbf_admissible(const BarrierEval& ev, const ControlInput& u,
                    const BarrierParams& p, BarrierMode mode);

}  // namespace dhocbf
