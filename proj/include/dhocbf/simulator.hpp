#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dhocbf/dynamics.hpp"
#include "dhocbf/planner.hpp"
#include "dhocbf/safety_filter.hpp"

namespace dhocbf {

/// Where the reference control comes from each step.
///   track: PD tracking of the reference trajectory.
///   idm:   car-following acceleration along the path + lateral PD.
/// The trajectory itself is a generated constant-velocity line, inline
/// samples, or a file loaded at parse time.
struct ReferenceSpec {
  enum class Provider { track, idm };
  enum class Source { line, samples, file };

  Provider provider = Provider::track;
  Source source = Source::line;

  Vec2 line_start;              // line source
  Vec2 line_velocity;           // line source [m/s]
  ReferenceTrajectory trajectory;  // samples source; also filled after file load
  std::string file_path;        // file source, loaded by the scenario parser
  PDGains gains;
  IDMParams idm;                // used when provider == idm
};

/// Complete description of one closed-loop run.
struct Scenario {
  std::string name = "scenario";
  EgoState ego_init;
  ShapeSpec ego_shape;  // point by default
  ReferenceSpec reference;
  std::vector<ObstacleProfile> obstacles;
  FilterConfig filter;
  double dt = 0.1;     // [s]
  double t_end = 10.0; // [s]
  long seed = 0;       // reserved for randomized providers; runs are deterministic
};

/// Per-obstacle log entry of one step.
struct ObstacleTraceEntry {
  std::string id;
  double surface_distance = 0.0;  // [m]
  double d_safe = 0.0;            // [m]
  double h = 0.0;                 // [m^2]
  double row_residual = 0.0;      // a·u_applied - b, <= 0 when satisfied
  bool in_range = false;          // whether the row entered the QP
};

/// One step of the closed loop: state, controls, barrier data, QP outcome.
struct TraceRecord {
  double t = 0.0;
  EgoState ego;
  ControlInput u_ref;
  ControlInput u_applied;
  std::vector<ObstacleTraceEntry> obstacles;
  QPStatus qp_status = QPStatus::optimal;
  std::vector<RowSource> active_set;
  double slack = 0.0;
};

/// Throws ValidationError if any scenario field violates its invariants.
void validate_scenario(const Scenario& s);

/// The tracked trajectory for a reference source: a two-sample line over
/// [0, t_end] for the line source, the stored samples otherwise.
ReferenceTrajectory materialize_reference(const ReferenceSpec& spec, double t_end);

/// Run the closed loop: sense obstacles, get the reference control, filter it
/// through the barrier QP, integrate. One record per step,
/// ceil(t_end / dt) steps at t = k dt. Deterministic for a fixed scenario.
/// Under policy error an infeasible QP raises InfeasibleError carrying the
/// step index; other policies always complete, logging any violation.
std::vector<TraceRecord> run_scenario(const Scenario& s);

/// Named validity-experiment presets (without mode suffixes):
///   speed_sweep:    one circular obstacle ahead at speeds {0, 1, 3} m/s,
///                   same direction as the ego.
///   radius_sweep:   obstacle at 2 m/s in +x, radii {0.5, 1.0, 1.5, 2.0} m.
///   perturbation:   obstacle stationary until T = t_end/2, then -1 m/s in x.
///   multi_obstacle: three circular obstacles straddling the reference line.
/// The ego is a point tracking a straight 6 m/s reference in +x.
struct PresetOverrides {
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<BarrierVariant> variant;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> margin;
  std::optional<InfeasibilityPolicy> policy;
  std::optional<long> seed;
};

std::vector<Scenario> build_preset(const std::string& name, BarrierMode mode,
                                   const PresetOverrides& overrides = {});

/// All preset names accepted by build_preset.
const std::vector<std::string>& preset_names();

}  // namespace dhocbf
