#pragma once

#include <string>
#include <vector>

#include "dhocbf/planner.hpp"
#include "dhocbf/simulator.hpp"

namespace dhocbf {

/// Parse a scenario document: `key = value` lines, `#` comments, one
/// scenario per file. Unknown keys are rejected; errors carry the file name
/// and line number. A `reference.file` trajectory is loaded here, relative
/// to the scenario file's directory.
Scenario parse_scenario(const std::string& path);

/// Same parser over an in-memory document; origin names the source in errors.
Scenario parse_scenario_text(const std::string& text, const std::string& origin);

/// Canonical text form of a scenario. Floats keep full precision so the
/// output parses back to an equal scenario.
std::string serialize_scenario(const Scenario& s);

/// Field-by-field comparison (exact on doubles).
bool scenario_equal(const Scenario& a, const Scenario& b);

/// Formats a double with 9 significant digits, the trace CSV convention.
std::string format_csv_double(double v);

/// Trace CSV columns: t, x, y, vx, vy, ux_ref, uy_ref, ux, uy, then per
/// obstacle i: dist_i, dsafe_i, h_i, residual_i, then qp_status, slack.
/// Header row mandatory, floats with 9 significant digits.
std::string trace_csv(const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

/// Loads a reference trajectory from CSV with a header naming at least the
/// columns t, x, y, vx, vy (extra columns ignored). Throws ValidationError
/// on a missing/empty file or malformed rows.
ReferenceTrajectory load_trajectory_csv(const std::string& path);

/// Minimal parsed view of a trace CSV for offline metrics.
struct LoadedTrace {
  std::vector<double> times;
  std::vector<Vec2> positions;
  std::vector<double> min_distance;  // +inf where the row has no dist columns
};

LoadedTrace load_trace_csv(const std::string& path);

}  // namespace dhocbf
