// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dhocbf/barrier.hpp"
#include "dhocbf/cli.hpp"
#include "dhocbf/dynamics.hpp"
#include "dhocbf/geometry.hpp"
#include "dhocbf/metrics.hpp"
#include "dhocbf/planner.hpp"
#include "dhocbf/scenario_io.hpp"
#include "dhocbf/simulator.hpp"

using namespace dhocbf;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& label, bool pass,
            const std::string& detail = "") {
  std::printf("%s  criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number,
              label.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++g_failures;
}

// --------------------------------------------------------------------------
// 1. Forward invariance on all four presets, dhocbf, beta1=beta2=1, dt=0.1.
// --------------------------------------------------------------------------
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool invariant = true;
  std::string detail;
  for (const std::string& name : preset_names()) {
    for (const Scenario& s : build_preset(name, BarrierMode::dhocbf, {})) {
      const auto trace = run_scenario(s);
      for (const TraceRecord& rec : trace) {
        if (rec.qp_status != QPStatus::optimal) continue;
        for (const ObstacleTraceEntry& o : rec.obstacles) {
          if (!(o.surface_distance > 0.0) || o.h < 0.0) {
            invariant = false;
            detail = s.name + " at t=" + format_csv_double(rec.t);
          }
        }
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < 5.0;
  report(1, "forward invariance (all presets, dhocbf, dt=0.1)",
         invariant && in_time,
         invariant ? ("runtime " + format_csv_double(secs) + " s") : detail);
}

// --------------------------------------------------------------------------
// 2/3. Perturbation preset: identical controls before the switch, at least
// the hocbf clearance after it.
// --------------------------------------------------------------------------
void criteria_2_3() {
  const Scenario sd = build_preset("perturbation", BarrierMode::dhocbf, {})[0];
  const Scenario sh = build_preset("perturbation", BarrierMode::hocbf, {})[0];
  const double switch_time = sd.obstacles[0].segments[1].start_time;
  const auto td = run_scenario(sd);
  const auto th = run_scenario(sh);

  bool static_equal = td.size() == th.size();
  double worst_gap = 0.0;
  for (std::size_t k = 0; k < td.size() && static_equal; ++k) {
    if (td[k].t >= switch_time - 1e-12) break;
    worst_gap = std::max({worst_gap, std::abs(td[k].u_applied.ux - th[k].u_applied.ux),
                          std::abs(td[k].u_applied.uy - th[k].u_applied.uy)});
    static_equal = worst_gap <= 1e-9;
  }
  report(2, "static equivalence before the switch (|du| <= 1e-9)", static_equal,
         "max |du| = " + format_csv_double(worst_gap));

  double post_d = std::numeric_limits<double>::infinity();
  double post_h = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < td.size(); ++k) {
    if (td[k].t < switch_time) continue;
    for (const ObstacleTraceEntry& o : td[k].obstacles) {
      post_d = std::min(post_d, o.surface_distance);
    }
    for (const ObstacleTraceEntry& o : th[k].obstacles) {
      post_h = std::min(post_h, o.surface_distance);
    }
  }
  report(3, "dynamic adaptation after the switch (dhocbf >= hocbf clearance)",
         post_d >= post_h - 1e-6,
         "dhocbf " + format_csv_double(post_d) + " m vs hocbf " +
             format_csv_double(post_h) + " m");
}

// --------------------------------------------------------------------------
// 4. Reduced conservatism on the speed sweep, monotone ADE gap.
// --------------------------------------------------------------------------
void criterion_4() {
  const auto dhocbf_runs = build_preset("speed_sweep", BarrierMode::dhocbf, {});
  const auto hocbf_runs = build_preset("speed_sweep", BarrierMode::hocbf, {});
  std::vector<double> gap;
  double ade_d3 = 0.0;
  double ade_h3 = 0.0;
  for (std::size_t i = 0; i < dhocbf_runs.size(); ++i) {
    const ReferenceTrajectory ref =
        materialize_reference(dhocbf_runs[i].reference, dhocbf_runs[i].t_end);
    const double ade_d = ade_to_reference(run_scenario(dhocbf_runs[i]), ref);
    const double ade_h = ade_to_reference(run_scenario(hocbf_runs[i]), ref);
    gap.push_back(ade_h - ade_d);
    if (i + 1 == dhocbf_runs.size()) {
      ade_d3 = ade_d;
      ade_h3 = ade_h;
    }
  }
  const bool strict = ade_d3 < ade_h3;
  const bool monotone = gap[1] >= gap[0] - 1e-12 && gap[2] >= gap[1] - 1e-12;
  report(4, "reduced conservatism (ADE gap grows with obstacle speed)",
         strict && monotone,
         "gaps m = " + format_csv_double(gap[0]) + ", " + format_csv_double(gap[1]) +
             ", " + format_csv_double(gap[2]));
}

// --------------------------------------------------------------------------
// 5. QP exactness via the validate subcommand (1000 instances, res 1e-3).
// --------------------------------------------------------------------------
void criterion_5() {
  std::ostringstream out;
  std::ostringstream err;
  const auto t0 = std::chrono::steady_clock::now();
  const int rc =
      cli::run_cli({"validate", "--samples", "1000", "--seed", "42"}, out, err);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(5, "QP exactness vs grid oracle (1000 instances, res 1e-3)",
         rc == 0 && secs < 10.0, "runtime " + format_csv_double(secs) + " s");
}

// --------------------------------------------------------------------------
// 6. Finite-difference consistency of the barrier derivatives, order 1.
// --------------------------------------------------------------------------
struct FdError {
  double first = 0.0;
  double second = 0.0;
};

FdError fd_errors(const Scenario& s) {
  const auto trace = run_scenario(s);
  const ObstacleProfile& profile = s.obstacles[0];
  BarrierParams params = s.filter.params;
  params.variant = BarrierVariant::relative_velocity;

  FdError err;
  for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
    const auto eval_at = [&](std::size_t idx) {
      const ObstacleState obs = obstacle_state_at(profile, trace[idx].t);
      const PlacedShape ego_pt{ShapeSpec::make_point(), trace[idx].ego.position(), 0};
      const double d_safe =
          dynamic_safe_distance(ego_pt, obs.placed(), s.filter.margin);
      return lie_derivatives(trace[idx].ego, obs, d_safe, params);
    };
    const BarrierEval e0 = eval_at(k);
    const BarrierEval ep = eval_at(k + 1);
    const BarrierEval em = eval_at(k - 1);

    const double fd1 = (ep.h - e0.h) / s.dt;
    err.first = std::max(err.first, std::abs(fd1 - (e0.lf_h + e0.lfobs_h)));

    const double fd2 = (ep.h - 2.0 * e0.h + em.h) / (s.dt * s.dt);
    const double hdd = e0.second_order_drift +
                       dot(e0.lglf_h, trace[k].u_applied.vec());
    err.second = std::max(err.second, std::abs(fd2 - hdd));
  }
  return err;
}

void criterion_6() {
  PresetOverrides coarse;
  coarse.variant = BarrierVariant::relative_velocity;
  PresetOverrides fine = coarse;
  fine.dt = 0.05;
  const Scenario s_coarse = build_preset("speed_sweep", BarrierMode::dhocbf, coarse)[2];
  const Scenario s_fine = build_preset("speed_sweep", BarrierMode::dhocbf, fine)[2];

  const FdError e_coarse = fd_errors(s_coarse);
  const FdError e_fine = fd_errors(s_fine);
  // Fitted order-1 constants C = E / dt must be stable under halving.
  const double c1_coarse = e_coarse.first / 0.1;
  const double c1_fine = e_fine.first / 0.05;
  const double c2_coarse = e_coarse.second / 0.1;
  const double c2_fine = e_fine.second / 0.05;
  const bool first_ok = c1_fine <= 3.0 * c1_coarse && c1_fine >= c1_coarse / 3.0;
  const bool second_ok = c2_fine <= 3.0 * c2_coarse && c2_fine >= c2_coarse / 3.0;
  report(6, "derivative consistency at order 1 under dt halving",
         first_ok && second_ok,
         "C1 " + format_csv_double(c1_coarse) + "->" + format_csv_double(c1_fine) +
             ", C2 " + format_csv_double(c2_coarse) + "->" +
             format_csv_double(c2_fine));
}

// --------------------------------------------------------------------------
// 7. Geometry against the dense boundary-sampling reference, 500 pairs.
// --------------------------------------------------------------------------
void criterion_7() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double two_pi = 2.0 * std::acos(-1.0);
  double worst = 0.0;
  bool symmetric = true;
  int pairs = 0;
  while (pairs < 500) {
    PlacedShape a{ShapeSpec::make_rectangle(0.5 + 1.5 * u(rng), 0.5 + 1.5 * u(rng)),
                  {-2.0 + 4.0 * u(rng), -2.0 + 4.0 * u(rng)},
                  two_pi * u(rng)};
    const double dist = 2.2 + 4.8 * u(rng);
    const double ang = two_pi * u(rng);
    PlacedShape b{ShapeSpec::make_rectangle(0.5 + 1.5 * u(rng), 0.5 + 1.5 * u(rng)),
                  a.position + Vec2{dist * std::cos(ang), dist * std::sin(ang)},
                  two_pi * u(rng)};
    const double sampled = sampled_boundary_distance(a, b, 10000);
    if (sampled <= 0.05) continue;  // keep clearly disjoint pairs
    const ClosestPair impl = shape_min_distance(a, b);
    if (impl.penetration > 0.0) {
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    worst = std::max(worst, std::abs(impl.distance - sampled));
    const ClosestPair swapped = shape_min_distance(b, a);
    symmetric = symmetric && impl.distance == swapped.distance &&
                impl.penetration == swapped.penetration;
    ++pairs;
  }
  report(7, "rectangle distances within 1e-3 of the sampling oracle, symmetric",
         worst <= 1e-3 && symmetric, "max |diff| = " + format_csv_double(worst));
}

// --------------------------------------------------------------------------
// 8. Car-following closed form at the published parameter set.
// --------------------------------------------------------------------------
void criterion_8() {
  const IDMParams p;  // 9.63, 2.5, 1.6, 2.0, 3.0, delta 4
  const double inf = std::numeric_limits<double>::infinity();
  const bool at_rest = std::abs(idm_acceleration(0.0, inf, 0.0, p) - 2.0) <= 1e-6;
  const bool at_v0 = std::abs(idm_acceleration(9.63, inf, 0.0, p) - 0.0) <= 1e-6;
  const bool at_gap =
      std::abs(idm_acceleration(5.0, 10.5, 0.0, p) - (-0.14534659580237868)) <= 1e-6;
  report(8, "car-following closed form (three worked examples, 1e-6)",
         at_rest && at_v0 && at_gap);
}

// --------------------------------------------------------------------------
// 9. Displacement and success-rate definitions.
// --------------------------------------------------------------------------
void criterion_9() {
  bool ok = true;

  std::vector<Vec2> a;
  std::vector<Vec2> b;
  for (int i = 0; i < 10; ++i) {
    a.push_back({static_cast<double>(i), 0.0});
    b.push_back({static_cast<double>(i) + 1.0, 0.0});
  }
  ok = ok && ade(a, a) == 0.0;
  ok = ok && std::abs(ade(a, b) - 1.0) <= 1e-15;

  std::vector<Vec2> shorter(b.begin(), b.begin() + 8);
  ok = ok && std::abs(ade(a, shorter) - 1.0) <= 1e-15;  // truncation to 8

  std::vector<Vec2> c = a;
  c.back() = a.back() + Vec2{3.0, 4.0};
  ok = ok && std::abs(fde(a, c) - 5.0) <= 1e-15;

  std::vector<Vec2> pinned = a;
  pinned[8] = a[8] + Vec2{0.0, 2.0};  // goal-pinned: same last point
  ok = ok && fde(a, pinned) == 0.0 && std::abs(fde(a, pinned, true) - 2.0) <= 1e-15;

  const auto make_trace = [](double min_dist) {
    std::vector<TraceRecord> tr(3);
    for (int i = 0; i < 3; ++i) {
      tr[i].t = i * 0.1;
      tr[i].obstacles.push_back({"o", min_dist + 0.1 * i, 1.0, 1.0, -1.0, true});
    }
    return tr;
  };
  const std::vector<std::vector<TraceRecord>> traces{
      make_trace(0.5), make_trace(1.0), make_trace(-0.01)};
  ok = ok && std::abs(success_rate(traces, 0.0) - 2.0 / 3.0) <= 1e-15;
  ok = ok && success_rate(traces, 0.6) == 1.0 / 3.0;  // margin flips a trace

  report(9, "metric definitions (ADE, FDE, penultimate FDE, SR)", ok);
}

// --------------------------------------------------------------------------
// 10. Determinism: repeated preset runs, byte-identical trace CSVs.
// --------------------------------------------------------------------------
std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_10() {
  const fs::path base = fs::temp_directory_path() / "dhocbf_acceptance";
  fs::remove_all(base);
  bool ok = true;
  std::ostringstream out;
  std::ostringstream err;
  for (const char* rep : {"a", "b"}) {
    const int rc = cli::run_cli({"--out", (base / rep).string(), "preset", "--name",
                                 "speed_sweep", "--jobs", "2"},
                                out, err);
    ok = ok && rc == 0;
  }
  int compared = 0;
  if (ok) {
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      const fs::path other = base / "b" / entry.path().filename();
      ok = ok && fs::exists(other) && read_file(entry.path()) == read_file(other);
      ++compared;
    }
  }
  report(10, "determinism: repeated preset runs are byte-identical", ok && compared == 7,
         std::to_string(compared) + " files compared");
}

}  // namespace

int main() {
  criterion_1();
  criteria_2_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
