#pragma once

#include <utility>
#include <vector>

#include "dhocbf/planner.hpp"
#include "dhocbf/simulator.hpp"
#include "dhocbf/vec2.hpp"

namespace dhocbf {

/// Summary of a batch of rollouts against their references.
struct MetricReport {
  double ade = 0.0;              // [m], mean over runs
  double fde = 0.0;              // [m]
  double fde_penultimate = 0.0;  // [m]
  double sr = 0.0;               // fraction of collision-free runs in [0, 1]
  double min_distance = 0.0;     // [m], minimum over all runs and steps
  double var_ade = 0.0;          // population variance across runs
  double var_fde = 0.0;
};

/// Mean Euclidean displacement over the first min(len_a, len_b) aligned steps.
/// Throws ValidationError when either sequence is empty.
double ade(const std::vector<Vec2>& traj_a, const std::vector<Vec2>& traj_b);

/// Displacement at the last aligned index, or the second-to-last when
/// penultimate is set (used for goal-pinned planners whose final points
/// coincide by construction). Throws ValidationError when too short.
double fde(const std::vector<Vec2>& traj_a, const std::vector<Vec2>& traj_b,
           bool penultimate = false);

/// Minimum surface distance over obstacles at each step; +infinity entries
/// when a step has no obstacles.
std::vector<std::pair<double, double>> min_distance_series(
    const std::vector<TraceRecord>& trace);

/// Minimum over the whole trace of the per-step minimum surface distance.
double trace_min_distance(const std::vector<TraceRecord>& trace);

/// Fraction of traces whose minimum surface distance stays strictly above
/// collision_margin at every step. Throws ValidationError on an empty batch.
double success_rate(const std::vector<std::vector<TraceRecord>>& traces,
                    double collision_margin);

/// Ego positions of a trace.
std::vector<Vec2> trace_positions(const std::vector<TraceRecord>& trace);

/// Mean displacement between the rollout and the reference evaluated at the
/// trace's own step times.
double ade_to_reference(const std::vector<TraceRecord>& trace,
                        const ReferenceTrajectory& ref);

/// Batch report: ADE/FDE statistics across (rollout, reference) pairs plus
/// the collision summary of the traces.
MetricReport summarize_runs(const std::vector<std::vector<TraceRecord>>& traces,
                            const std::vector<ReferenceTrajectory>& references,
                            double collision_margin);

}  // namespace dhocbf
