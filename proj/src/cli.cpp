#include "dhocbf/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "dhocbf/errors.hpp"
#include "dhocbf/metrics.hpp"
#include "dhocbf/scenario_io.hpp"
#include "dhocbf/simulator.hpp"

namespace dhocbf::cli {
namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  if (const char* env = std::getenv("DHOCBF_OUT_DIR")) return env;
  return "out";
}

BarrierVariant parse_variant(const std::string& v) {
  if (v == "relative_velocity") return BarrierVariant::relative_velocity;
  if (v == "sum_of_squares") return BarrierVariant::sum_of_squares;
  throw CLI::ValidationError("--variant",
                             "expected relative_velocity or sum_of_squares");
}

BarrierMode parse_mode(const std::string& v) {
  if (v == "hocbf") return BarrierMode::hocbf;
  if (v == "dhocbf") return BarrierMode::dhocbf;
  throw CLI::ValidationError("--mode", "expected hocbf or dhocbf");
}

InfeasibilityPolicy parse_policy(const std::string& v) {
  if (v == "error") return InfeasibilityPolicy::error;
  if (v == "slack") return InfeasibilityPolicy::slack;
  if (v == "max_brake") return InfeasibilityPolicy::max_brake;
  throw CLI::ValidationError("--policy", "expected error, slack or max_brake");
}

struct Overrides {
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<std::string> variant;
  std::optional<std::string> mode;
  std::optional<double> dt;
  std::optional<double> margin;
  std::optional<std::string> policy;
  std::optional<long> seed;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--beta1", o.beta1, "class-K slope beta1 [1/s]");
  cmd->add_option("--beta2", o.beta2, "class-K slope beta2 [1/s]");
  cmd->add_option("--variant", o.variant,
                  "barrier drift variant: relative_velocity | sum_of_squares");
  cmd->add_option("--dt", o.dt, "control period [s]");
  cmd->add_option("--margin", o.margin, "extra safe distance [m]");
  cmd->add_option("--policy", o.policy,
                  "infeasibility policy: error | slack | max_brake");
  cmd->add_option("--seed", o.seed, "scenario seed");
}

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.beta1) s.filter.params.beta1 = *o.beta1;
  if (o.beta2) s.filter.params.beta2 = *o.beta2;
  if (o.variant) s.filter.params.variant = parse_variant(*o.variant);
  if (o.mode) s.filter.mode = parse_mode(*o.mode);
  if (o.dt) s.dt = *o.dt;
  if (o.margin) s.filter.margin = *o.margin;
  if (o.policy) s.filter.policy = parse_policy(*o.policy);
  if (o.seed) s.seed = *o.seed;
}

PresetOverrides to_preset_overrides(const Overrides& o) {
  PresetOverrides po;
  po.beta1 = o.beta1;
  po.beta2 = o.beta2;
  if (o.variant) po.variant = parse_variant(*o.variant);
  po.dt = o.dt;
  po.margin = o.margin;
  if (o.policy) po.policy = parse_policy(*o.policy);
  po.seed = o.seed;
  return po;
}

double trace_min_h(const std::vector<TraceRecord>& trace) {
  double h = std::numeric_limits<double>::infinity();
  for (const TraceRecord& rec : trace) {
    for (const ObstacleTraceEntry& obs : rec.obstacles) h = std::min(h, obs.h);
  }
  return h;
}

struct RunRow {
  std::string scenario;
  std::string mode;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double min_distance = 0.0;
  double min_h = 0.0;
  double ade_to_ref = 0.0;
  long n_optimal = 0;
  long n_relaxed = 0;
  long n_infeasible = 0;
};

RunRow summarize_run(const Scenario& sc, const std::vector<TraceRecord>& trace) {
  RunRow row;
  row.scenario = sc.name;
  row.mode = sc.filter.mode == BarrierMode::dhocbf ? "dhocbf" : "hocbf";
  row.beta1 = sc.filter.params.beta1;
  row.beta2 = sc.filter.params.beta2;
  row.min_distance = trace_min_distance(trace);
  row.min_h = trace_min_h(trace);
  row.ade_to_ref = ade_to_reference(trace, materialize_reference(sc.reference, sc.t_end));
  for (const TraceRecord& rec : trace) {
    switch (rec.qp_status) {
      case QPStatus::optimal:
        ++row.n_optimal;
        break;
      case QPStatus::relaxed:
        ++row.n_relaxed;
        break;
      case QPStatus::infeasible:
        ++row.n_infeasible;
        break;
    }
  }
  return row;
}

void write_summary_csv(std::ostream& out, const std::vector<RunRow>& rows,
                       const std::vector<std::pair<std::string, bool>>& checks) {
  out << "kind,scenario,mode,beta1,beta2,min_distance_m,min_h_m2,ade_to_ref_m,"
         "n_optimal,n_relaxed,n_infeasible,check_name,check_pass\n";
  for (const RunRow& r : rows) {
    out << "run," << r.scenario << "," << r.mode << "," << format_csv_double(r.beta1)
        << "," << format_csv_double(r.beta2) << ","
        << format_csv_double(r.min_distance) << "," << format_csv_double(r.min_h)
        << "," << format_csv_double(r.ade_to_ref) << "," << r.n_optimal << ","
        << r.n_relaxed << "," << r.n_infeasible << ",,\n";
  }
  for (const auto& [name, pass] : checks) {
    out << "check,,,,,,,,,,," << name << "," << (pass ? 1 : 0) << "\n";
  }
}

/// True iff every optimal step keeps a positive obstacle gap and h >= 0.
bool forward_invariance_holds(const std::vector<TraceRecord>& trace) {
  for (const TraceRecord& rec : trace) {
    if (rec.qp_status != QPStatus::optimal) continue;
    for (const ObstacleTraceEntry& obs : rec.obstacles) {
      if (!(obs.surface_distance > 0.0) || obs.h < 0.0) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// preset / sweep
// ---------------------------------------------------------------------------

struct PresetRun {
  Scenario scenario;
  std::vector<TraceRecord> trace;
};

std::vector<std::pair<std::string, bool>> preset_checks(
    const std::string& preset, const std::vector<PresetRun>& dhocbf_runs,
    const std::vector<PresetRun>& hocbf_runs) {
  std::vector<std::pair<std::string, bool>> checks;

  if (!dhocbf_runs.empty()) {
    bool invariance = true;
    for (const PresetRun& run : dhocbf_runs) {
      invariance = invariance && forward_invariance_holds(run.trace);
    }
    checks.emplace_back("forward_invariance_dhocbf", invariance);
  }

  if (hocbf_runs.size() != dhocbf_runs.size() || hocbf_runs.empty()) return checks;

  if (preset == "speed_sweep") {
    std::vector<double> gaps;
    bool less_conservative = true;
    for (std::size_t i = 0; i < dhocbf_runs.size(); ++i) {
      const Scenario& sc = dhocbf_runs[i].scenario;
      const ReferenceTrajectory ref = materialize_reference(sc.reference, sc.t_end);
      const double ade_d = ade_to_reference(dhocbf_runs[i].trace, ref);
      const double ade_h = ade_to_reference(hocbf_runs[i].trace, ref);
      gaps.push_back(ade_h - ade_d);
    }
    less_conservative = gaps.back() > 0.0;
    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) {
      monotone = monotone && gaps[i] >= gaps[i - 1] - 1e-12;
    }
    checks.emplace_back("reduced_conservatism", less_conservative && monotone);
  }

  if (preset == "perturbation") {
    const Scenario& sc = dhocbf_runs[0].scenario;
    const double switch_time = sc.obstacles.at(0).segments.size() > 1
                                   ? sc.obstacles[0].segments[1].start_time
                                   : sc.t_end;
    const auto& td = dhocbf_runs[0].trace;
    const auto& th = hocbf_runs[0].trace;

    bool static_equal = td.size() == th.size();
    double post_min_d = std::numeric_limits<double>::infinity();
    double post_min_h = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; static_equal && k < td.size(); ++k) {
      if (td[k].t < switch_time - 1e-12) {
        static_equal = std::abs(td[k].u_applied.ux - th[k].u_applied.ux) <= 1e-9 &&
                       std::abs(td[k].u_applied.uy - th[k].u_applied.uy) <= 1e-9;
      }
    }
    for (std::size_t k = 0; k < td.size(); ++k) {
      if (td[k].t >= switch_time) {
        for (const ObstacleTraceEntry& obs : td[k].obstacles) {
          post_min_d = std::min(post_min_d, obs.surface_distance);
        }
        for (const ObstacleTraceEntry& obs : th[k].obstacles) {
          post_min_h = std::min(post_min_h, obs.surface_distance);
        }
      }
    }
    checks.emplace_back("static_equivalence", static_equal);
    checks.emplace_back("dynamic_adaptation", post_min_d >= post_min_h - 1e-6);
  }

  return checks;
}

void run_batch(std::vector<PresetRun>& runs, long jobs) {
  if (jobs <= 1 || runs.size() <= 1) {
    for (PresetRun& run : runs) run.trace = run_scenario(run.scenario);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(runs.size());
  const long n_workers = std::min<long>(jobs, static_cast<long>(runs.size()));
  for (long w = 0; w < n_workers; ++w) {
    workers.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= runs.size()) return;
        try {
          runs[i].trace = run_scenario(runs[i].scenario);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int cmd_preset(const std::string& name, const std::string& mode_arg,
               const Overrides& overrides, const std::string& out_dir, long jobs,
               std::ostream& out, std::ostream& err) {
  const PresetOverrides po = to_preset_overrides(overrides);

  std::vector<PresetRun> dhocbf_runs;
  std::vector<PresetRun> hocbf_runs;
  const bool want_dhocbf = mode_arg == "both" || mode_arg == "dhocbf";
  const bool want_hocbf = mode_arg == "both" || mode_arg == "hocbf";
  for (const Scenario& sc : build_preset(name, BarrierMode::dhocbf, po)) {
    if (want_dhocbf) dhocbf_runs.push_back({sc, {}});
  }
  for (const Scenario& sc : build_preset(name, BarrierMode::hocbf, po)) {
    if (want_hocbf) hocbf_runs.push_back({sc, {}});
  }

  std::vector<PresetRun> all;
  for (PresetRun& r : dhocbf_runs) all.push_back(std::move(r));
  for (PresetRun& r : hocbf_runs) all.push_back(std::move(r));
  try {
    run_batch(all, jobs);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return 1;
  }
  std::size_t idx = 0;
  for (PresetRun& r : dhocbf_runs) r = std::move(all[idx++]);
  for (PresetRun& r : hocbf_runs) r = std::move(all[idx++]);

  fs::create_directories(out_dir);
  std::vector<RunRow> rows;
  for (const auto* group : {&dhocbf_runs, &hocbf_runs}) {
    for (const PresetRun& run : *group) {
      const std::string mode =
          run.scenario.filter.mode == BarrierMode::dhocbf ? "dhocbf" : "hocbf";
      write_trace_csv((fs::path(out_dir) / (run.scenario.name + "_" + mode + ".csv")).string(),
                      run.trace);
      rows.push_back(summarize_run(run.scenario, run.trace));
    }
  }

  const auto checks = preset_checks(name, dhocbf_runs, hocbf_runs);
  const std::string summary_path =
      (fs::path(out_dir) / (name + "_summary.csv")).string();
  std::ofstream summary(summary_path, std::ios::binary);
  if (!summary) {
    err << "cannot write " << summary_path << "\n";
    return 1;
  }
  write_summary_csv(summary, rows, checks);

  bool all_pass = true;
  for (const auto& [check_name, pass] : checks) {
    out << "check " << check_name << ": " << (pass ? "pass" : "FAIL") << "\n";
    all_pass = all_pass && pass;
  }
  out << "wrote " << rows.size() << " trace file(s) and " << summary_path << "\n";
  return all_pass ? 0 : 1;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string tok;
  std::istringstream in(csv);
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

int cmd_sweep(const std::string& name, const std::string& beta1_list,
              const std::string& beta2_list, const Overrides& overrides,
              const std::string& out_dir, long jobs, std::ostream& out,
              std::ostream& err) {
  std::vector<double> beta1s;
  std::vector<double> beta2s;
  try {
    beta1s = parse_list(beta1_list);
    beta2s = parse_list(beta2_list);
  } catch (const std::exception&) {
    err << "bad --beta1/--beta2 list\n";
    return 2;
  }
  if (beta1s.empty()) beta1s.push_back(overrides.beta1.value_or(1.0));
  if (beta2s.empty()) beta2s.push_back(overrides.beta2.value_or(1.0));

  std::vector<PresetRun> runs;
  for (const double b1 : beta1s) {
    for (const double b2 : beta2s) {
      Overrides o = overrides;
      o.beta1 = b1;
      o.beta2 = b2;
      const PresetOverrides po = to_preset_overrides(o);
      for (const BarrierMode mode : {BarrierMode::dhocbf, BarrierMode::hocbf}) {
        for (Scenario& sc : build_preset(name, mode, po)) {
          sc.name += std::string("_b1_") + format_csv_double(b1) + "_b2_" +
                     format_csv_double(b2);
          runs.push_back({std::move(sc), {}});
        }
      }
    }
  }

  try {
    run_batch(runs, jobs);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return 1;
  }

  fs::create_directories(out_dir);
  std::vector<RunRow> rows;
  for (const PresetRun& run : runs) {
    const std::string mode =
        run.scenario.filter.mode == BarrierMode::dhocbf ? "dhocbf" : "hocbf";
    write_trace_csv(
        (fs::path(out_dir) / (run.scenario.name + "_" + mode + ".csv")).string(),
        run.trace);
    rows.push_back(summarize_run(run.scenario, run.trace));
  }
  const std::string summary_path =
      (fs::path(out_dir) / (name + "_sweep_summary.csv")).string();
  std::ofstream summary(summary_path, std::ios::binary);
  write_summary_csv(summary, rows, {});
  out << "wrote " << rows.size() << " trace file(s) and " << summary_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// validate: randomized QP-vs-oracle and geometry-vs-sampling checks
// ---------------------------------------------------------------------------

struct QpInstance {
  ControlInput u_ref;
  std::vector<LinearConstraintRow> rows;
  BoxBounds box;
};

void print_qp_instance(std::ostream& err, const QpInstance& inst) {
  err << "qp instance: u_ref=(" << format_csv_double(inst.u_ref.ux) << ","
      << format_csv_double(inst.u_ref.uy) << ") box=[("
      << format_csv_double(inst.box.lo.x) << "," << format_csv_double(inst.box.lo.y)
      << "),(" << format_csv_double(inst.box.hi.x) << ","
      << format_csv_double(inst.box.hi.y) << ")]\n";
  for (const LinearConstraintRow& r : inst.rows) {
    err << "  row a=(" << format_csv_double(r.a.x) << "," << format_csv_double(r.a.y)
        << ") b=" << format_csv_double(r.b) << "\n";
  }
}

// Independent inside-test used only to reject overlapping random pairs.
bool point_in_box_local(Vec2 p, const PlacedShape& s) {
  const Vec2 local = rotated(p - s.position, -s.heading);
  return std::abs(local.x) <= 0.5 * s.shape.length &&
         std::abs(local.y) <= 0.5 * s.shape.width;
}

int cmd_validate(long samples, long seed, std::ostream& out, std::ostream& err) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double resolution = 1e-3;
  const BoxBounds box;  // default +/-3 per axis

  double worst_exact_minus_oracle = -std::numeric_limits<double>::infinity();
  double worst_oracle_minus_exact = -std::numeric_limits<double>::infinity();
  long feasibility_mismatches = 0;
  long oracle_feasible = 0;
  bool qp_ok = true;

  for (long k = 0; k < samples; ++k) {
    QpInstance inst;
    inst.box = box;
    inst.u_ref = {-4.0 + 8.0 * unit(rng), -4.0 + 8.0 * unit(rng)};
    const int n_rows = static_cast<int>(unit(rng) * 7.0);  // 0..6
    for (int i = 0; i < n_rows; ++i) {
      LinearConstraintRow row;
      row.a = {-20.0 + 40.0 * unit(rng), -20.0 + 40.0 * unit(rng)};
      // Anchor the boundary near the box so rows are often active.
      const Vec2 anchor{box.lo.x + (box.hi.x - box.lo.x) * unit(rng),
                        box.lo.y + (box.hi.y - box.lo.y) * unit(rng)};
      row.b = dot(row.a, anchor) + (-5.0 + 20.0 * unit(rng));
      row.source = {RowSource::Kind::dhocbf, "r" + std::to_string(i)};
      inst.rows.push_back(row);
    }

    const QPResult exact = solve_qp2(inst.u_ref, inst.rows, inst.box);
    const QPResult oracle = brute_force_qp(inst.u_ref, inst.rows, inst.box, resolution);

    if (oracle.status == QPStatus::optimal) {
      ++oracle_feasible;
      if (exact.status != QPStatus::optimal) {
        ++feasibility_mismatches;
        qp_ok = false;
        print_qp_instance(err, inst);
        continue;
      }
      const double obj_exact = norm_sq(exact.u_star.vec() - inst.u_ref.vec());
      const double obj_oracle = norm_sq(oracle.u_star.vec() - inst.u_ref.vec());
      // Gradient bound of |u - u_ref|^2 over the box.
      double grad_bound = 0.0;
      for (const Vec2 corner : {Vec2{box.lo.x, box.lo.y}, Vec2{box.lo.x, box.hi.y},
                                Vec2{box.hi.x, box.lo.y}, Vec2{box.hi.x, box.hi.y}}) {
        grad_bound = std::max(grad_bound, 2.0 * norm(corner - inst.u_ref.vec()));
      }
      const double tol = 2.0 * resolution * grad_bound + 1e-12;
      worst_exact_minus_oracle =
          std::max(worst_exact_minus_oracle, obj_exact - obj_oracle);
      worst_oracle_minus_exact =
          std::max(worst_oracle_minus_exact, obj_oracle - obj_exact);
      if (obj_exact > obj_oracle + tol) {
        qp_ok = false;
        print_qp_instance(err, inst);
      }
    }
  }

  out << "qp samples=" << samples << " oracle_feasible=" << oracle_feasible
      << " exact_minus_oracle_max=" << format_csv_double(worst_exact_minus_oracle)
      << " oracle_minus_exact_max=" << format_csv_double(worst_oracle_minus_exact)
      << " feasibility_mismatches=" << feasibility_mismatches << "\n";

  // Geometry: oriented rectangle pairs against the boundary-sampling oracle.
  const long pairs = std::max<long>(1, samples / 2);
  double worst_geom = 0.0;
  bool geom_ok = true;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (long k = 0; k < pairs; ++k) {
    PlacedShape a;
    PlacedShape b;
    double oracle_dist = 0.0;
    while (true) {
      a.shape = ShapeSpec::make_rectangle(0.5 + 1.5 * unit(rng), 0.5 + 1.5 * unit(rng));
      b.shape = ShapeSpec::make_rectangle(0.5 + 1.5 * unit(rng), 0.5 + 1.5 * unit(rng));
      a.position = {-2.0 + 4.0 * unit(rng), -2.0 + 4.0 * unit(rng)};
      const double dist = 2.2 + 4.8 * unit(rng);
      const double ang = two_pi * unit(rng);
      b.position = a.position + Vec2{dist * std::cos(ang), dist * std::sin(ang)};
      a.heading = two_pi * unit(rng);
      b.heading = two_pi * unit(rng);
      if (point_in_box_local(a.position, b) || point_in_box_local(b.position, a)) {
        continue;
      }
      oracle_dist = sampled_boundary_distance(a, b, 10000);
      if (oracle_dist > 0.05) break;  // keep clearly disjoint pairs
    }
    const ClosestPair impl = shape_min_distance(a, b);
    const ClosestPair swapped = shape_min_distance(b, a);
    const bool symmetric = impl.distance == swapped.distance &&
                           impl.penetration == swapped.penetration;
    const double diff = std::abs(impl.distance - oracle_dist);
    worst_geom = std::max(worst_geom, diff);
    if (diff > 1e-3 || impl.penetration != 0.0 || !symmetric) {
      geom_ok = false;
      err << "geometry pair: A pos=(" << format_csv_double(a.position.x) << ","
          << format_csv_double(a.position.y) << ") wl=("
          << format_csv_double(a.shape.width) << "," << format_csv_double(a.shape.length)
          << ") th=" << format_csv_double(a.heading) << " B pos=("
          << format_csv_double(b.position.x) << "," << format_csv_double(b.position.y)
          << ") wl=(" << format_csv_double(b.shape.width) << ","
          << format_csv_double(b.shape.length) << ") th=" << format_csv_double(b.heading)
          << " impl=" << format_csv_double(impl.distance)
          << " oracle=" << format_csv_double(oracle_dist) << "\n";
    }
  }

  out << "geometry pairs=" << pairs << " max_abs_diff=" << format_csv_double(worst_geom)
      << "\n";

  if (!qp_ok || !geom_ok) {
    out << "validate: FAIL\n";
    return 1;
  }
  out << "validate: pass\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run / metrics
// ---------------------------------------------------------------------------

int cmd_run(const std::string& scenario_path, const Overrides& overrides,
            const std::string& out_dir, std::ostream& out, std::ostream& err) {
  Scenario sc = parse_scenario(scenario_path);
  apply_overrides(sc, overrides);

  std::vector<TraceRecord> trace;
  try {
    trace = run_scenario(sc);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return 1;
  }

  fs::create_directories(out_dir);
  const std::string trace_path = (fs::path(out_dir) / (sc.name + ".csv")).string();
  write_trace_csv(trace_path, trace);

  const RunRow row = summarize_run(sc, trace);
  out << "scenario=" << row.scenario << " mode=" << row.mode
      << " steps=" << trace.size()
      << " min_distance_m=" << format_csv_double(row.min_distance)
      << " min_h=" << format_csv_double(row.min_h)
      << " ade_to_ref_m=" << format_csv_double(row.ade_to_ref)
      << " optimal=" << row.n_optimal << " relaxed=" << row.n_relaxed
      << " infeasible=" << row.n_infeasible << "\n";
  out << "wrote " << trace_path << "\n";
  return 0;
}

int cmd_metrics(const std::string& trace_path, const std::string& reference_path,
                bool penultimate, const std::vector<std::string>& sr_traces,
                double collision_margin, std::ostream& out, std::ostream& err) {
  (void)err;
  const LoadedTrace trace = load_trace_csv(trace_path);
  const ReferenceTrajectory ref = load_trajectory_csv(reference_path);

  std::vector<Vec2> ref_positions;
  ref_positions.reserve(ref.samples.size());
  for (const TrajectorySample& s : ref.samples) ref_positions.push_back(s.position);

  out << "metric,value\n";
  out << "ade_m," << format_csv_double(ade(trace.positions, ref_positions)) << "\n";
  out << "fde_m," << format_csv_double(fde(trace.positions, ref_positions, false))
      << "\n";
  if (penultimate) {
    out << "fde_penultimate_m,"
        << format_csv_double(fde(trace.positions, ref_positions, true)) << "\n";
  }

  if (!sr_traces.empty()) {
    std::size_t clean = 0;
    for (const std::string& path : sr_traces) {
      const LoadedTrace t = load_trace_csv(path);
      double min_d = std::numeric_limits<double>::infinity();
      for (const double d : t.min_distance) min_d = std::min(min_d, d);
      if (min_d > collision_margin) ++clean;
    }
    out << "sr," << format_csv_double(static_cast<double>(clean) / sr_traces.size())
        << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"DHOCBF safety-filter batch simulator"};
  app.name("dhocbf");
  app.fallthrough();

  std::string out_dir = default_out_dir();
  app.add_option("--out", out_dir, "output directory (env DHOCBF_OUT_DIR)")
      ->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "run one scenario file");
  std::string scenario_path;
  run_cmd->add_option("--scenario", scenario_path, "scenario file")->required();
  Overrides run_overrides;
  add_override_flags(run_cmd, run_overrides);
  run_cmd->add_option("--mode", run_overrides.mode, "barrier mode: hocbf | dhocbf");

  // preset
  auto* preset_cmd = app.add_subcommand("preset", "run a named experiment preset");
  std::string preset_name;
  std::string preset_mode = "both";
  long jobs = 1;
  preset_cmd->add_option("--name", preset_name, "preset name")->required();
  preset_cmd->add_option("--mode", preset_mode,
                         "barrier mode: hocbf | dhocbf | both");
  preset_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  Overrides preset_overrides;
  add_override_flags(preset_cmd, preset_overrides);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a preset over a beta grid");
  std::string sweep_name;
  std::string beta1_list;
  std::string beta2_list;
  long sweep_jobs = 1;
  sweep_cmd->add_option("--name", sweep_name, "preset name")->required();
  sweep_cmd->add_option("--beta1-list", beta1_list, "comma-separated beta1 values");
  sweep_cmd->add_option("--beta2-list", beta2_list, "comma-separated beta2 values");
  sweep_cmd->add_option("--jobs", sweep_jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  Overrides sweep_overrides;
  add_override_flags(sweep_cmd, sweep_overrides);

  // validate
  auto* validate_cmd =
      app.add_subcommand("validate", "randomized solver and geometry self-checks");
  long samples = 1000;
  long seed = 42;
  validate_cmd->add_option("--samples", samples, "number of random instances")
      ->check(CLI::PositiveNumber);
  validate_cmd->add_option("--seed", seed, "random seed");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "displacement metrics for CSVs");
  std::string trace_path;
  std::string reference_path;
  bool penultimate = false;
  std::vector<std::string> sr_traces;
  double collision_margin = 0.0;
  metrics_cmd->add_option("--trace", trace_path, "rollout trace CSV")->required();
  metrics_cmd->add_option("--reference", reference_path, "reference CSV")->required();
  metrics_cmd->add_flag("--penultimate", penultimate,
                        "also report the penultimate-step FDE");
  metrics_cmd->add_option("--sr-traces", sr_traces,
                          "trace CSVs for the success-rate computation");
  metrics_cmd->add_option("--collision-margin", collision_margin,
                          "collision margin for SR [m]");

  app.require_subcommand(1);

  std::vector<const char*> argv;
  argv.push_back("dhocbf");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(scenario_path, run_overrides, out_dir, out, err);
    }
    if (preset_cmd->parsed()) {
      if (preset_mode != "both" && preset_mode != "hocbf" && preset_mode != "dhocbf") {
        err << "usage error: --mode must be hocbf, dhocbf or both\n";
        return 2;
      }
      bool known = false;
      for (const std::string& name : preset_names()) known = known || name == preset_name;
      if (!known) {
        err << "usage error: unknown preset '" << preset_name << "'\n";
        return 2;
      }
      return cmd_preset(preset_name, preset_mode, preset_overrides, out_dir, jobs,
                        out, err);
    }
    if (sweep_cmd->parsed()) {
      bool known = false;
      for (const std::string& name : preset_names()) known = known || name == sweep_name;
      if (!known) {
        err << "usage error: unknown preset '" << sweep_name << "'\n";
        return 2;
      }
      return cmd_sweep(sweep_name, beta1_list, beta2_list, sweep_overrides, out_dir,
                       sweep_jobs, out, err);
    }
    if (validate_cmd->parsed()) {
      return cmd_validate(samples, seed, out, err);
    }
    if (metrics_cmd->parsed()) {
      return cmd_metrics(trace_path, reference_path, penultimate, sr_traces,
                         collision_margin, out, err);
    }
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace dhocbf::cli
