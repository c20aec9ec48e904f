#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dhocbf/barrier.hpp"
#include "dhocbf/dynamics.hpp"
#include "dhocbf/geometry.hpp"

namespace dhocbf {

/// Per-axis control bounds u_min <= u <= u_max.
struct BoxBounds {
  Vec2 lo{-3.0, -3.0};
  Vec2 hi{3.0, 3.0};
};

enum class QPStatus { optimal, infeasible, relaxed };

std::string to_string(QPStatus status);

struct QPResult {
  QPStatus status = QPStatus::optimal;
  ControlInput u_star;
  std::vector<RowSource> active_set;  // rows tight at the solution
  double slack = 0.0;                 // shared relaxation, 0 unless relaxed
};

/// What to do when the barrier rows and the box admit no control.
///   error:     surface an InfeasibleError to the caller.
///   slack:     relax the barrier rows by a shared xi >= 0, minimizing
///              |u - u_ref|^2 + slack_weight * xi^2 with the box kept hard.
///   max_brake: command the box corner opposing the current velocity.
enum class InfeasibilityPolicy { error, slack, max_brake };

/// Everything the per-step safety filter needs besides the state.
struct FilterConfig {
  BarrierParams params;
  BarrierMode mode = BarrierMode::dhocbf;
  BoxBounds box;
  double margin = 0.0;          // [m] added to every safe distance
  double sensory_radius = 8.0;  // [m]
  InfeasibilityPolicy policy = InfeasibilityPolicy::slack;
  double slack_weight = 1e6;
  ShapeSpec ego_shape;  // point unless configured otherwise
};

/// Barrier evaluation of one obstacle against the current ego state.
/// surface_distance is shape-aware; in_range uses the point-ego gate of
/// obstacles_in_range. The row is built for every obstacle so traces can
/// report residuals, but only in-range rows enter the QP.
struct ObstacleConstraintInfo {
  std::string id;
  double surface_distance = 0.0;
  double d_safe = 0.0;
  double h = 0.0;
  LinearConstraintRow row;
  bool in_range = false;
};

/// Exact minimizer of |u - u_ref|^2 subject to the rows and the box.
///
/// The optimum of a strictly convex QP in two variables lies at u_ref, on a
/// single constraint boundary, or at the intersection of two boundaries
/// (box faces included as rows), so enumerating those candidates and keeping
/// the feasible one with the smallest objective is exact. Ties break to the
/// lexicographically smallest (ux, uy). Nearly parallel boundary pairs
/// (|cross| < 1e-12) are skipped. Throws ValidationError on NaN input or an
/// empty box; an empty feasible set yields status infeasible, never a throw.
QPResult solve_qp2(const ControlInput& u_ref,
                   const std::vector<LinearConstraintRow>& rows,
                   const BoxBounds& box);

/// Independent grid-search reference for solve_qp2: the best feasible grid
/// point at the given resolution (feasibility checked exactly, no tolerance).
/// The per-column feasible y-range is an interval, so each column is reduced
/// exactly without visiting every point. active_set is left empty.
QPResult brute_force_qp(const ControlInput& u_ref,
                        const std::vector<LinearConstraintRow>& rows,
                        const BoxBounds& box, double resolution);

/// Rows, barrier values and distances for every obstacle at the current state.
std::vector<ObstacleConstraintInfo> evaluate_obstacle_constraints(
    const EgoState& ego, const std::vector<ObstacleState>& obstacles,
    const FilterConfig& cfg);

/// Solve with the in-range rows of pre-evaluated constraints and apply the
/// infeasibility policy. Returns the control actually applied.
std::pair<ControlInput, QPResult> filter_with_constraints(
    const ControlInput& u_ref, const EgoState& ego,
    const std::vector<ObstacleConstraintInfo>& infos, const FilterConfig& cfg);

/// One-call form: evaluate the obstacles, solve, apply the policy.
std::pair<ControlInput, QPResult> filter_control(
    const ControlInput& u_ref, const EgoState& ego,
    const std::vector<ObstacleState>& obstacles, const FilterConfig& cfg);

}  // namespace dhocbf
