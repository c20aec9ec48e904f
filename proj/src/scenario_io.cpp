#include "dhocbf/scenario_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dhocbf/errors.hpp"

namespace dhocbf {
namespace {

struct ParsedPair {
  int line = 0;
  std::string key;
  std::string value;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ValidationError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<ParsedPair> tokenize(const std::string& text, const std::string& origin) {
  std::vector<ParsedPair> pairs;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value'");
    }
    ParsedPair p;
    p.line = line_no;
    p.key = trim(line.substr(0, eq));
    p.value = trim(line.substr(eq + 1));
    if (p.key.empty()) fail(origin, line_no, "empty key");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<double> parse_numbers(const ParsedPair& p, std::size_t count,
                                  const std::string& origin) {
  std::istringstream in(p.value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(origin, p.line, "field '" + p.key + "': bad number '" + tok + "'");
    }
  }
  if (out.size() != count) {
    fail(origin, p.line,
         "field '" + p.key + "': expected " + std::to_string(count) +
             " number(s), got " + std::to_string(out.size()));
  }
  return out;
}

double parse_number(const ParsedPair& p, const std::string& origin) {
  return parse_numbers(p, 1, origin)[0];
}

long parse_integer(const ParsedPair& p, const std::string& origin) {
  try {
    std::size_t used = 0;
    const long v = std::stol(p.value, &used);
    if (used != p.value.size()) throw std::invalid_argument(p.value);
    return v;
  } catch (const std::exception&) {
    fail(origin, p.line, "field '" + p.key + "': bad integer '" + p.value + "'");
  }
}

ShapeSpec::Kind parse_shape_kind(const ParsedPair& p, const std::string& origin) {
  if (p.value == "point") return ShapeSpec::Kind::point;
  if (p.value == "circle") return ShapeSpec::Kind::circle;
  if (p.value == "rectangle") return ShapeSpec::Kind::rectangle;
  fail(origin, p.line, "field '" + p.key + "': unknown shape '" + p.value + "'");
}

const char* shape_kind_name(ShapeSpec::Kind k) {
  switch (k) {
    case ShapeSpec::Kind::point:
      return "point";
    case ShapeSpec::Kind::circle:
      return "circle";
    case ShapeSpec::Kind::rectangle:
      return "rectangle";
  }
  return "?";
}

std::string full_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Scenario parse_scenario_impl(const std::string& text, const std::string& origin,
                             const std::filesystem::path& base_dir) {
  Scenario s;
  bool ref_start_set = false;
  bool ref_velocity_set = false;
  bool have_obstacle = false;
  ObstacleProfile current;

  const auto finish_obstacle = [&]() {
    if (!have_obstacle) return;
    if (current.segments.empty()) {
      current.segments.push_back({0.0, {0.0, 0.0}});  // stationary by default
    }
    s.obstacles.push_back(current);
    current = ObstacleProfile{};
  };

  for (const ParsedPair& p : tokenize(text, origin)) {
    const std::string& k = p.key;

    if (k == "name") {
      s.name = p.value;
    } else if (k == "dt_s") {
      s.dt = parse_number(p, origin);
      if (!(s.dt > 0.0)) fail(origin, p.line, "dt_s must be > 0");
    } else if (k == "t_end_s") {
      s.t_end = parse_number(p, origin);
      if (!(s.t_end > 0.0)) fail(origin, p.line, "t_end_s must be > 0");
    } else if (k == "seed") {
      s.seed = parse_integer(p, origin);
    } else if (k == "ego.x_m") {
      s.ego_init.x = parse_number(p, origin);
    } else if (k == "ego.y_m") {
      s.ego_init.y = parse_number(p, origin);
    } else if (k == "ego.vx_mps") {
      s.ego_init.vx = parse_number(p, origin);
    } else if (k == "ego.vy_mps") {
      s.ego_init.vy = parse_number(p, origin);
    } else if (k == "ego.shape") {
      s.ego_shape.kind = parse_shape_kind(p, origin);
    } else if (k == "ego.radius_m") {
      s.ego_shape.radius = parse_number(p, origin);
    } else if (k == "ego.width_m") {
      s.ego_shape.width = parse_number(p, origin);
    } else if (k == "ego.length_m") {
      s.ego_shape.length = parse_number(p, origin);
    } else if (k == "reference.provider") {
      if (p.value == "track") {
        s.reference.provider = ReferenceSpec::Provider::track;
      } else if (p.value == "idm") {
        s.reference.provider = ReferenceSpec::Provider::idm;
      } else {
        fail(origin, p.line, "unknown reference provider '" + p.value + "'");
      }
    } else if (k == "reference.source") {
      if (p.value == "line") {
        s.reference.source = ReferenceSpec::Source::line;
      } else if (p.value == "samples") {
        s.reference.source = ReferenceSpec::Source::samples;
      } else if (p.value == "file") {
        s.reference.source = ReferenceSpec::Source::file;
      } else {
        fail(origin, p.line, "unknown reference source '" + p.value + "'");
      }
    } else if (k == "reference.start_x_m") {
      s.reference.line_start.x = parse_number(p, origin);
      ref_start_set = true;
    } else if (k == "reference.start_y_m") {
      s.reference.line_start.y = parse_number(p, origin);
      ref_start_set = true;
    } else if (k == "reference.vx_mps") {
      s.reference.line_velocity.x = parse_number(p, origin);
      ref_velocity_set = true;
    } else if (k == "reference.vy_mps") {
      s.reference.line_velocity.y = parse_number(p, origin);
      ref_velocity_set = true;
    } else if (k == "reference.sample") {
      const auto v = parse_numbers(p, 5, origin);
      s.reference.trajectory.samples.push_back({v[0], {v[1], v[2]}, {v[3], v[4]}});
    } else if (k == "reference.file") {
      s.reference.file_path = p.value;
    } else if (k == "reference.kp_per_s2") {
      s.reference.gains.kp = parse_number(p, origin);
    } else if (k == "reference.kd_per_s") {
      s.reference.gains.kd = parse_number(p, origin);
    } else if (k == "idm.v0_mps") {
      s.reference.idm.v0 = parse_number(p, origin);
    } else if (k == "idm.s0_m") {
      s.reference.idm.s0 = parse_number(p, origin);
    } else if (k == "idm.headway_s") {
      s.reference.idm.t_headway = parse_number(p, origin);
    } else if (k == "idm.a_max_mps2") {
      s.reference.idm.a_max = parse_number(p, origin);
    } else if (k == "idm.b_comfort_mps2") {
      s.reference.idm.b_comfort = parse_number(p, origin);
    } else if (k == "idm.delta") {
      s.reference.idm.delta = parse_number(p, origin);
    } else if (k == "idm.hard_brake_factor") {
      s.reference.idm.hard_brake_factor = parse_number(p, origin);
    } else if (k == "filter.mode") {
      if (p.value == "hocbf") {
        s.filter.mode = BarrierMode::hocbf;
      } else if (p.value == "dhocbf") {
        s.filter.mode = BarrierMode::dhocbf;
      } else {
        fail(origin, p.line, "unknown filter mode '" + p.value + "'");
      }
    } else if (k == "filter.beta1_per_s") {
      s.filter.params.beta1 = parse_number(p, origin);
      if (!(s.filter.params.beta1 > 0.0)) fail(origin, p.line, "beta1 must be > 0");
    } else if (k == "filter.beta2_per_s") {
      s.filter.params.beta2 = parse_number(p, origin);
      if (!(s.filter.params.beta2 > 0.0)) fail(origin, p.line, "beta2 must be > 0");
    } else if (k == "filter.variant") {
      if (p.value == "relative_velocity") {
        s.filter.params.variant = BarrierVariant::relative_velocity;
      } else if (p.value == "sum_of_squares") {
        s.filter.params.variant = BarrierVariant::sum_of_squares;
      } else {
        fail(origin, p.line, "unknown barrier variant '" + p.value + "'");
      }
    } else if (k == "filter.margin_m") {
      s.filter.margin = parse_number(p, origin);
      if (s.filter.margin < 0.0) fail(origin, p.line, "margin_m must be >= 0");
    } else if (k == "filter.sensory_radius_m") {
      s.filter.sensory_radius = parse_number(p, origin);
      if (!(s.filter.sensory_radius > 0.0)) {
        fail(origin, p.line, "sensory_radius_m must be > 0");
      }
    } else if (k == "filter.u_min_mps2") {
      const auto v = parse_numbers(p, 2, origin);
      s.filter.box.lo = {v[0], v[1]};
    } else if (k == "filter.u_max_mps2") {
      const auto v = parse_numbers(p, 2, origin);
      s.filter.box.hi = {v[0], v[1]};
    } else if (k == "filter.policy") {
      if (p.value == "error") {
        s.filter.policy = InfeasibilityPolicy::error;
      } else if (p.value == "slack") {
        s.filter.policy = InfeasibilityPolicy::slack;
      } else if (p.value == "max_brake") {
        s.filter.policy = InfeasibilityPolicy::max_brake;
      } else {
        fail(origin, p.line, "unknown infeasibility policy '" + p.value + "'");
      }
    } else if (k == "filter.slack_weight") {
      s.filter.slack_weight = parse_number(p, origin);
      if (!(s.filter.slack_weight > 0.0)) {
        fail(origin, p.line, "slack_weight must be > 0");
      }
    } else if (k == "obstacle.id") {
      finish_obstacle();
      have_obstacle = true;
      current.id = p.value;
    } else if (k.rfind("obstacle.", 0) == 0) {
      if (!have_obstacle) {
        fail(origin, p.line, "obstacle fields must follow an obstacle.id line");
      }
      if (k == "obstacle.shape") {
        current.shape.kind = parse_shape_kind(p, origin);
      } else if (k == "obstacle.radius_m") {
        current.shape.radius = parse_number(p, origin);
      } else if (k == "obstacle.width_m") {
        current.shape.width = parse_number(p, origin);
      } else if (k == "obstacle.length_m") {
        current.shape.length = parse_number(p, origin);
      } else if (k == "obstacle.x_m") {
        current.initial_position.x = parse_number(p, origin);
      } else if (k == "obstacle.y_m") {
        current.initial_position.y = parse_number(p, origin);
      } else if (k == "obstacle.segment") {
        const auto v = parse_numbers(p, 3, origin);
        current.segments.push_back({v[0], {v[1], v[2]}});
      } else {
        fail(origin, p.line, "unknown key '" + k + "'");
      }
    } else {
      fail(origin, p.line, "unknown key '" + k + "'");
    }
  }
  finish_obstacle();

  // Defaults that depend on other fields.
  if (s.reference.source == ReferenceSpec::Source::line) {
    if (!ref_start_set) s.reference.line_start = s.ego_init.position();
    if (!ref_velocity_set) s.reference.line_velocity = s.ego_init.velocity();
  }
  if (s.reference.source == ReferenceSpec::Source::file) {
    if (s.reference.file_path.empty()) {
      throw ValidationError(origin + ": reference.file is required for the file source");
    }
    std::filesystem::path p(s.reference.file_path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    s.reference.trajectory = load_trajectory_csv(p.string());
  }

  s.filter.ego_shape = s.ego_shape;
  validate_scenario(s);
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_impl(buf.str(), path,
                             std::filesystem::path(path).parent_path());
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  return parse_scenario_impl(text, origin, {});
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "name = " << s.name << "\n";
  out << "dt_s = " << full_double(s.dt) << "\n";
  out << "t_end_s = " << full_double(s.t_end) << "\n";
  out << "seed = " << s.seed << "\n\n";

  out << "ego.x_m = " << full_double(s.ego_init.x) << "\n";
  out << "ego.y_m = " << full_double(s.ego_init.y) << "\n";
  out << "ego.vx_mps = " << full_double(s.ego_init.vx) << "\n";
  out << "ego.vy_mps = " << full_double(s.ego_init.vy) << "\n";
  out << "ego.shape = " << shape_kind_name(s.ego_shape.kind) << "\n";
  if (s.ego_shape.kind == ShapeSpec::Kind::circle) {
    out << "ego.radius_m = " << full_double(s.ego_shape.radius) << "\n";
  } else if (s.ego_shape.kind == ShapeSpec::Kind::rectangle) {
    out << "ego.width_m = " << full_double(s.ego_shape.width) << "\n";
    out << "ego.length_m = " << full_double(s.ego_shape.length) << "\n";
  }
  out << "\n";

  out << "reference.provider = "
      << (s.reference.provider == ReferenceSpec::Provider::idm ? "idm" : "track")
      << "\n";
  switch (s.reference.source) {
    case ReferenceSpec::Source::line:
      out << "reference.source = line\n";
      out << "reference.start_x_m = " << full_double(s.reference.line_start.x) << "\n";
      out << "reference.start_y_m = " << full_double(s.reference.line_start.y) << "\n";
      out << "reference.vx_mps = " << full_double(s.reference.line_velocity.x) << "\n";
      out << "reference.vy_mps = " << full_double(s.reference.line_velocity.y) << "\n";
      break;
    case ReferenceSpec::Source::samples:
      out << "reference.source = samples\n";
      for (const TrajectorySample& smp : s.reference.trajectory.samples) {
        out << "reference.sample = " << full_double(smp.t) << " "
            << full_double(smp.position.x) << " " << full_double(smp.position.y)
            << " " << full_double(smp.velocity.x) << " "
            << full_double(smp.velocity.y) << "\n";
      }
      break;
    case ReferenceSpec::Source::file:
      out << "reference.source = file\n";
      out << "reference.file = " << s.reference.file_path << "\n";
      break;
  }
  out << "reference.kp_per_s2 = " << full_double(s.reference.gains.kp) << "\n";
  out << "reference.kd_per_s = " << full_double(s.reference.gains.kd) << "\n";
  if (s.reference.provider == ReferenceSpec::Provider::idm) {
    out << "idm.v0_mps = " << full_double(s.reference.idm.v0) << "\n";
    out << "idm.s0_m = " << full_double(s.reference.idm.s0) << "\n";
    out << "idm.headway_s = " << full_double(s.reference.idm.t_headway) << "\n";
    out << "idm.a_max_mps2 = " << full_double(s.reference.idm.a_max) << "\n";
    out << "idm.b_comfort_mps2 = " << full_double(s.reference.idm.b_comfort) << "\n";
    out << "idm.delta = " << full_double(s.reference.idm.delta) << "\n";
    out << "idm.hard_brake_factor = " << full_double(s.reference.idm.hard_brake_factor)
        << "\n";
  }
  out << "\n";

  out << "filter.mode = " << (s.filter.mode == BarrierMode::dhocbf ? "dhocbf" : "hocbf")
      << "\n";
  out << "filter.beta1_per_s = " << full_double(s.filter.params.beta1) << "\n";
  out << "filter.beta2_per_s = " << full_double(s.filter.params.beta2) << "\n";
  out << "filter.variant = "
      << (s.filter.params.variant == BarrierVariant::relative_velocity
              ? "relative_velocity"
              : "sum_of_squares")
      << "\n";
  out << "filter.margin_m = " << full_double(s.filter.margin) << "\n";
  out << "filter.sensory_radius_m = " << full_double(s.filter.sensory_radius) << "\n";
  out << "filter.u_min_mps2 = " << full_double(s.filter.box.lo.x) << " "
      << full_double(s.filter.box.lo.y) << "\n";
  out << "filter.u_max_mps2 = " << full_double(s.filter.box.hi.x) << " "
      << full_double(s.filter.box.hi.y) << "\n";
  const char* policy = s.filter.policy == InfeasibilityPolicy::error    ? "error"
                       : s.filter.policy == InfeasibilityPolicy::slack ? "slack"
                                                                       : "max_brake";
  out << "filter.policy = " << policy << "\n";
  out << "filter.slack_weight = " << full_double(s.filter.slack_weight) << "\n";

  for (const ObstacleProfile& p : s.obstacles) {
    out << "\nobstacle.id = " << p.id << "\n";
    out << "obstacle.shape = " << shape_kind_name(p.shape.kind) << "\n";
    if (p.shape.kind == ShapeSpec::Kind::circle) {
      out << "obstacle.radius_m = " << full_double(p.shape.radius) << "\n";
    } else if (p.shape.kind == ShapeSpec::Kind::rectangle) {
      out << "obstacle.width_m = " << full_double(p.shape.width) << "\n";
      out << "obstacle.length_m = " << full_double(p.shape.length) << "\n";
    }
    out << "obstacle.x_m = " << full_double(p.initial_position.x) << "\n";
    out << "obstacle.y_m = " << full_double(p.initial_position.y) << "\n";
    for (const VelocitySegment& seg : p.segments) {
      out << "obstacle.segment = " << full_double(seg.start_time) << " "
          << full_double(seg.velocity.x) << " " << full_double(seg.velocity.y)
          << "\n";
    }
  }
  return out.str();
}

bool scenario_equal(const Scenario& a, const Scenario& b) {
  const auto shape_eq = [](const ShapeSpec& x, const ShapeSpec& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case ShapeSpec::Kind::point:
        return true;
      case ShapeSpec::Kind::circle:
        return x.radius == y.radius;
      case ShapeSpec::Kind::rectangle:
        return x.width == y.width && x.length == y.length;
    }
    return false;
  };

  if (a.name != b.name || a.dt != b.dt || a.t_end != b.t_end || a.seed != b.seed) {
    return false;
  }
  if (a.ego_init.x != b.ego_init.x || a.ego_init.y != b.ego_init.y ||
      a.ego_init.vx != b.ego_init.vx || a.ego_init.vy != b.ego_init.vy) {
    return false;
  }
  if (!shape_eq(a.ego_shape, b.ego_shape)) return false;

  const ReferenceSpec& ra = a.reference;
  const ReferenceSpec& rb = b.reference;
  if (ra.provider != rb.provider || ra.source != rb.source) return false;
  if (ra.source == ReferenceSpec::Source::line &&
      !(ra.line_start == rb.line_start && ra.line_velocity == rb.line_velocity)) {
    return false;
  }
  if (ra.source == ReferenceSpec::Source::file && ra.file_path != rb.file_path) {
    return false;
  }
  if (ra.source != ReferenceSpec::Source::line) {
    if (ra.trajectory.samples.size() != rb.trajectory.samples.size()) return false;
    for (std::size_t i = 0; i < ra.trajectory.samples.size(); ++i) {
      const TrajectorySample& sa = ra.trajectory.samples[i];
      const TrajectorySample& sb = rb.trajectory.samples[i];
      if (sa.t != sb.t || !(sa.position == sb.position) ||
          !(sa.velocity == sb.velocity)) {
        return false;
      }
    }
  }
  if (ra.gains.kp != rb.gains.kp || ra.gains.kd != rb.gains.kd) return false;
  if (ra.provider == ReferenceSpec::Provider::idm) {
    const IDMParams& ia = ra.idm;
    const IDMParams& ib = rb.idm;
    if (ia.v0 != ib.v0 || ia.s0 != ib.s0 || ia.t_headway != ib.t_headway ||
        ia.a_max != ib.a_max || ia.b_comfort != ib.b_comfort ||
        ia.delta != ib.delta || ia.hard_brake_factor != ib.hard_brake_factor) {
      return false;
    }
  }

  const FilterConfig& fa = a.filter;
  const FilterConfig& fb = b.filter;
  if (fa.mode != fb.mode || fa.params.beta1 != fb.params.beta1 ||
      fa.params.beta2 != fb.params.beta2 || fa.params.variant != fb.params.variant ||
      fa.margin != fb.margin || fa.sensory_radius != fb.sensory_radius ||
      !(fa.box.lo == fb.box.lo) || !(fa.box.hi == fb.box.hi) ||
      fa.policy != fb.policy || fa.slack_weight != fb.slack_weight) {
    return false;
  }

  if (a.obstacles.size() != b.obstacles.size()) return false;
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
    const ObstacleProfile& pa = a.obstacles[i];
    const ObstacleProfile& pb = b.obstacles[i];
    if (pa.id != pb.id || !shape_eq(pa.shape, pb.shape) ||
        !(pa.initial_position == pb.initial_position) ||
        pa.segments.size() != pb.segments.size()) {
      return false;
    }
    for (std::size_t j = 0; j < pa.segments.size(); ++j) {
      if (pa.segments[j].start_time != pb.segments[j].start_time ||
          !(pa.segments[j].velocity == pb.segments[j].velocity)) {
        return false;
      }
    }
  }
  return true;
}

std::string format_csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "t,x,y,vx,vy,ux_ref,uy_ref,ux,uy";
  const std::size_t n_obs = trace.empty() ? 0 : trace.front().obstacles.size();
  for (std::size_t i = 0; i < n_obs; ++i) {
    out << ",dist_" << i << ",dsafe_" << i << ",h_" << i << ",residual_" << i;
  }
  out << ",qp_status,slack\n";

  for (const TraceRecord& rec : trace) {
    out << format_csv_double(rec.t) << "," << format_csv_double(rec.ego.x) << ","
        << format_csv_double(rec.ego.y) << "," << format_csv_double(rec.ego.vx)
        << "," << format_csv_double(rec.ego.vy) << ","
        << format_csv_double(rec.u_ref.ux) << "," << format_csv_double(rec.u_ref.uy)
        << "," << format_csv_double(rec.u_applied.ux) << ","
        << format_csv_double(rec.u_applied.uy);
    for (const ObstacleTraceEntry& obs : rec.obstacles) {
      out << "," << format_csv_double(obs.surface_distance) << ","
          << format_csv_double(obs.d_safe) << "," << format_csv_double(obs.h) << ","
          << format_csv_double(obs.row_residual);
    }
    out << "," << to_string(rec.qp_status) << "," << format_csv_double(rec.slack)
        << "\n";
  }
  return out.str();
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write trace file '" + path + "'");
  out << trace_csv(trace);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  return out;
}

}  // namespace

ReferenceTrajectory load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trajectory file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("trajectory file '" + path + "' is empty");
  }
  const std::vector<std::string> header = split_csv_line(line);
  int it = -1, ix = -1, iy = -1, ivx = -1, ivy = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "t") it = i;
    if (header[i] == "x") ix = i;
    if (header[i] == "y") iy = i;
    if (header[i] == "vx") ivx = i;
    if (header[i] == "vy") ivy = i;
  }
  if (it < 0 || ix < 0 || iy < 0 || ivx < 0 || ivy < 0) {
    throw ValidationError("trajectory file '" + path +
                          "' needs columns t, x, y, vx, vy");
  }

  ReferenceTrajectory ref;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    const int needed = std::max({it, ix, iy, ivx, ivy});
    if (static_cast<int>(f.size()) <= needed) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": short row");
    }
    try {
      ref.samples.push_back({std::stod(f[it]),
                             {std::stod(f[ix]), std::stod(f[iy])},
                             {std::stod(f[ivx]), std::stod(f[ivy])}});
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  validate_trajectory(ref);
  return ref;
}

LoadedTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("trace file '" + path + "' is empty");
  }
  const std::vector<std::string> header = split_csv_line(line);
  int it = -1, ix = -1, iy = -1;
  std::vector<int> dist_cols;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "t") it = i;
    if (header[i] == "x") ix = i;
    if (header[i] == "y") iy = i;
    if (header[i].rfind("dist_", 0) == 0) dist_cols.push_back(i);
  }
  if (it < 0 || ix < 0 || iy < 0) {
    throw ValidationError("trace file '" + path + "' needs columns t, x, y");
  }

  LoadedTrace out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    try {
      out.times.push_back(std::stod(f.at(it)));
      out.positions.push_back({std::stod(f.at(ix)), std::stod(f.at(iy))});
      double d = std::numeric_limits<double>::infinity();
      for (const int c : dist_cols) d = std::min(d, std::stod(f.at(c)));
      out.min_distance.push_back(d);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": bad row");
    }
  }
  if (out.times.empty()) {
    throw ValidationError("trace file '" + path + "' has no data rows");
  }
  return out;
}

}  // namespace dhocbf
