#include "dhocbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dhocbf/errors.hpp"

namespace dhocbf {

double ade(const std::vector<Vec2>& traj_a, const std::vector<Vec2>& traj_b) {
  if (traj_a.empty() || traj_b.empty()) {
    throw ValidationError("ade: empty trajectory");
  }
  const std::size_t n = std::min(traj_a.size(), traj_b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += norm(traj_a[i] - traj_b[i]);
  return sum / static_cast<double>(n);
}

double fde(const std::vector<Vec2>& traj_a, const std::vector<Vec2>& traj_b,
           bool penultimate) {
  const std::size_t n = std::min(traj_a.size(), traj_b.size());
  const std::size_t needed = penultimate ? 2 : 1;
  if (n < needed) {
    throw ValidationError("fde: trajectories too short");
  }
  const std::size_t idx = n - needed;
  return norm(traj_a[idx] - traj_b[idx]);
}

std::vector<std::pair<double, double>> min_distance_series(
    const std::vector<TraceRecord>& trace) {
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.size());
  for (const TraceRecord& rec : trace) {
    double d = std::numeric_limits<double>::infinity();
    for (const ObstacleTraceEntry& obs : rec.obstacles) {
      d = std::min(d, obs.surface_distance);
    }
    out.emplace_back(rec.t, d);
  }
  return out;
}

double trace_min_distance(const std::vector<TraceRecord>& trace) {
  double d = std::numeric_limits<double>::infinity();
  for (const TraceRecord& rec : trace) {
    for (const ObstacleTraceEntry& obs : rec.obstacles) {
      d = std::min(d, obs.surface_distance);
    }
  }
  return d;
}

double success_rate(const std::vector<std::vector<TraceRecord>>& traces,
                    double collision_margin) {
  if (traces.empty()) {
    throw ValidationError("success_rate: no traces");
  }
  std::size_t clean = 0;
  for (const auto& trace : traces) {
    if (trace_min_distance(trace) > collision_margin) ++clean;
  }
  return static_cast<double>(clean) / static_cast<double>(traces.size());
}

std::vector<Vec2> trace_positions(const std::vector<TraceRecord>& trace) {
  std::vector<Vec2> out;
  out.reserve(trace.size());
  for (const TraceRecord& rec : trace) out.push_back(rec.ego.position());
  return out;
}

double ade_to_reference(const std::vector<TraceRecord>& trace,
                        const ReferenceTrajectory& ref) {
  if (trace.empty()) {
    throw ValidationError("ade_to_reference: empty trace");
  }
  validate_trajectory(ref);
  double sum = 0.0;
  for (const TraceRecord& rec : trace) {
    sum += norm(rec.ego.position() - sample_reference(ref, rec.t).position);
  }
  return sum / static_cast<double>(trace.size());
}

MetricReport summarize_runs(const std::vector<std::vector<TraceRecord>>& traces,
                            const std::vector<ReferenceTrajectory>& references,
                            double collision_margin) {
  if (traces.empty() || traces.size() != references.size()) {
    throw ValidationError("summarize_runs: need one reference per trace");
  }
  const std::size_t n = traces.size();
  std::vector<double> ades(n), fdes(n), fdes_pen(n);
  MetricReport report;
  report.min_distance = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<Vec2> rollout = trace_positions(traces[i]);
    std::vector<Vec2> ref_pts;
    ref_pts.reserve(traces[i].size());
    for (const TraceRecord& rec : traces[i]) {
      ref_pts.push_back(sample_reference(references[i], rec.t).position);
    }
    ades[i] = ade(rollout, ref_pts);
    fdes[i] = fde(rollout, ref_pts, false);
    fdes_pen[i] = rollout.size() >= 2 ? fde(rollout, ref_pts, true) : fdes[i];
    report.min_distance = std::min(report.min_distance, trace_min_distance(traces[i]));
  }

  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto pop_var = [&](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
  };

  report.ade = mean(ades);
  report.fde = mean(fdes);
  report.fde_penultimate = mean(fdes_pen);
  report.var_ade = pop_var(ades, report.ade);
  report.var_fde = pop_var(fdes, report.fde);
  report.sr = success_rate(traces, collision_margin);
  return report;
}

}  // namespace dhocbf
