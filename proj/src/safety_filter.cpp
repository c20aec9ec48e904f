#include "dhocbf/safety_filter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dhocbf/errors.hpp"

namespace dhocbf {
namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kParallelTol = 1e-12;

bool lex_less(Vec2 a, Vec2 b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

void validate_inputs(const ControlInput& u_ref,
                     const std::vector<LinearConstraintRow>& rows,
                     const BoxBounds& box) {
  if (!std::isfinite(u_ref.ux) || !std::isfinite(u_ref.uy)) {
    throw ValidationError("solve_qp2: non-finite reference control");
  }
  for (const LinearConstraintRow& r : rows) {
    if (!is_finite(r.a) || !std::isfinite(r.b)) {
      throw ValidationError("solve_qp2: non-finite constraint row");
    }
  }
  if (!is_finite(box.lo) || !is_finite(box.hi) || box.lo.x > box.hi.x ||
      box.lo.y > box.hi.y) {
    throw ValidationError("solve_qp2: empty or non-finite control box");
  }
}

std::vector<LinearConstraintRow> with_box_rows(
    const std::vector<LinearConstraintRow>& rows, const BoxBounds& box) {
  std::vector<LinearConstraintRow> all = rows;
  all.push_back({{1.0, 0.0}, box.hi.x, {RowSource::Kind::box, "x_max"}});
  all.push_back({{-1.0, 0.0}, -box.lo.x, {RowSource::Kind::box, "x_min"}});
  all.push_back({{0.0, 1.0}, box.hi.y, {RowSource::Kind::box, "y_max"}});
  all.push_back({{0.0, -1.0}, -box.lo.y, {RowSource::Kind::box, "y_min"}});
  return all;
}

bool feasible_for_all(Vec2 u, const std::vector<LinearConstraintRow>& all) {
  for (const LinearConstraintRow& r : all) {
    if (dot(r.a, u) - r.b > kFeasTol) return false;
  }
  return true;
}

std::vector<RowSource> active_rows_at(Vec2 u,
                                      const std::vector<LinearConstraintRow>& all) {
  std::vector<RowSource> active;
  for (const LinearConstraintRow& r : all) {
    if (std::abs(dot(r.a, u) - r.b) <= kFeasTol) active.push_back(r.source);
  }
  return active;
}

// ---------------------------------------------------------------------------
// Relaxed problem: minimize |u - u_ref|^2 + rho xi^2 over (u, xi) subject to
//   a_i·u - xi <= b_i   (barrier rows)
//   box faces on u      (hard)
//   xi >= 0
// Solved exactly by enumerating active sets of size 0..3 of the strictly
// convex 3-variable QP with diagonal Hessian diag(1, 1, rho).
// ---------------------------------------------------------------------------

using Vec3 = std::array<double, 3>;

struct Constraint3 {
  Vec3 c;
  double d;
};

double dot3(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Solves M x = rhs for k x k symmetric M (k <= 3) by Gaussian elimination
// with partial pivoting. Returns false when near-singular.
bool solve_small(int k, double M[3][3], double rhs[3], double out[3]) {
  int perm[3] = {0, 1, 2};
  double scale = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) scale = std::max(scale, std::abs(M[i][j]));
  if (scale == 0.0) return false;

  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(M[perm[r]][col]) > std::abs(M[perm[piv]][col])) piv = r;
    }
    std::swap(perm[col], perm[piv]);
    const double p = M[perm[col]][col];
    if (std::abs(p) < 1e-11 * scale) return false;
    for (int r = col + 1; r < k; ++r) {
      const double f = M[perm[r]][col] / p;
      for (int c2 = col; c2 < k; ++c2) M[perm[r]][c2] -= f * M[perm[col]][c2];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  for (int row = k - 1; row >= 0; --row) {
    double v = rhs[perm[row]];
    for (int c2 = row + 1; c2 < k; ++c2) v -= M[perm[row]][c2] * out[c2];
    out[row] = v / M[perm[row]][row];
  }
  return true;
}

QPResult solve_relaxed(const ControlInput& u_ref,
                       const std::vector<LinearConstraintRow>& rows,
                       const FilterConfig& cfg) {
  const double rho = cfg.slack_weight;
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ValidationError("slack policy requires positive slack_weight");
  }
  const Vec3 w_ref{u_ref.ux, u_ref.uy, 0.0};
  const Vec3 d_inv{1.0, 1.0, 1.0 / rho};

  std::vector<Constraint3> cons;
  for (const LinearConstraintRow& r : rows) {
    cons.push_back({{r.a.x, r.a.y, -1.0}, r.b});
  }
  cons.push_back({{1.0, 0.0, 0.0}, cfg.box.hi.x});
  cons.push_back({{-1.0, 0.0, 0.0}, -cfg.box.lo.x});
  cons.push_back({{0.0, 1.0, 0.0}, cfg.box.hi.y});
  cons.push_back({{0.0, -1.0, 0.0}, -cfg.box.lo.y});
  cons.push_back({{0.0, 0.0, -1.0}, 0.0});

  const auto objective = [&](const Vec3& w) {
    const double dx = w[0] - w_ref[0];
    const double dy = w[1] - w_ref[1];
    return dx * dx + dy * dy + rho * w[2] * w[2];
  };
  const auto feasible = [&](const Vec3& w) {
    for (const Constraint3& cn : cons) {
      if (dot3(cn.c, w) - cn.d > kFeasTol) return false;
    }
    return true;
  };

  bool found = false;
  Vec3 best{};
  double best_obj = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Vec3& w) {
    if (!std::isfinite(w[0]) || !std::isfinite(w[1]) || !std::isfinite(w[2])) return;
    if (!feasible(w)) return;
    const double obj = objective(w);
    const bool better =
        !found || obj < best_obj ||
        (obj == best_obj && (w[0] < best[0] || (w[0] == best[0] && w[1] < best[1])));
    if (better) {
      found = true;
      best = w;
      best_obj = obj;
    }
  };

  // Weighted projection of w_ref onto the equality system of an active set.
  const auto project_onto = [&](const std::vector<int>& act) {
    const int k = static_cast<int>(act.size());
    double M[3][3] = {};
    double rhs[3] = {};
    for (int i = 0; i < k; ++i) {
      const Constraint3& ci = cons[act[i]];
      for (int j = 0; j < k; ++j) {
        const Constraint3& cj = cons[act[j]];
        M[i][j] = ci.c[0] * d_inv[0] * cj.c[0] + ci.c[1] * d_inv[1] * cj.c[1] +
                  ci.c[2] * d_inv[2] * cj.c[2];
      }
      rhs[i] = dot3(ci.c, w_ref) - ci.d;
    }
    double mu[3] = {};
    if (!solve_small(k, M, rhs, mu)) return;
    Vec3 w = w_ref;
    for (int i = 0; i < k; ++i) {
      const Constraint3& ci = cons[act[i]];
      for (int axis = 0; axis < 3; ++axis) {
        w[axis] -= d_inv[axis] * ci.c[axis] * mu[i];
      }
    }
    consider(w);
  };

  consider(w_ref);
  const int n = static_cast<int>(cons.size());
  for (int i = 0; i < n; ++i) {
    project_onto({i});
    for (int j = i + 1; j < n; ++j) {
      project_onto({i, j});
      for (int k2 = j + 1; k2 < n; ++k2) project_onto({i, j, k2});
    }
  }

  QPResult result;
  if (!found) {
    // Only possible with an empty box, which validate_inputs rejects.
    result.status = QPStatus::infeasible;
    result.u_star = u_ref;
    return result;
  }
  result.status = QPStatus::relaxed;
  result.u_star = {best[0], best[1]};
  result.slack = std::max(0.0, best[2]);
  std::vector<LinearConstraintRow> relaxed_rows;
  for (const LinearConstraintRow& r : rows) {
    relaxed_rows.push_back({r.a, r.b + result.slack, r.source});
  }
  result.active_set =
      active_rows_at({best[0], best[1]}, with_box_rows(relaxed_rows, cfg.box));
  return result;
}

}  // namespace

std::string to_string(QPStatus status) {
  switch (status) {
    case QPStatus::optimal:
      return "optimal";
    case QPStatus::infeasible:
      return "infeasible";
    case QPStatus::relaxed:
      return "relaxed";
  }
  return "?";
}

QPResult solve_qp2(const ControlInput& u_ref,
                   const std::vector<LinearConstraintRow>& rows,
                   const BoxBounds& box) {
  validate_inputs(u_ref, rows, box);
  const std::vector<LinearConstraintRow> all = with_box_rows(rows, box);
  const Vec2 ref = u_ref.vec();

  QPResult result;
  if (feasible_for_all(ref, all)) {
    result.status = QPStatus::optimal;
    result.u_star = u_ref;
    result.active_set = active_rows_at(ref, all);
    return result;
  }

  bool found = false;
  Vec2 best;
  double best_obj = std::numeric_limits<double>::infinity();
  const auto consider = [&](Vec2 u) {
    if (!is_finite(u) || !feasible_for_all(u, all)) return;
    const double obj = norm_sq(u - ref);
    if (!found || obj < best_obj || (obj == best_obj && lex_less(u, best))) {
      found = true;
      best = u;
      best_obj = obj;
    }
  };

  // Projections onto single boundaries.
  for (const LinearConstraintRow& r : all) {
    const double aa = norm_sq(r.a);
    if (aa == 0.0) continue;
    consider(ref - ((dot(r.a, ref) - r.b) / aa) * r.a);
  }
  // Intersections of boundary pairs.
  const int n = static_cast<int>(all.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 ai = all[i].a;
      const Vec2 aj = all[j].a;
      const double det = cross(ai, aj);
      if (std::abs(det) < kParallelTol) continue;
      consider({(all[i].b * aj.y - all[j].b * ai.y) / det,
                (ai.x * all[j].b - aj.x * all[i].b) / det});
    }
  }

  if (!found) {
    result.status = QPStatus::infeasible;
    result.u_star = u_ref;
    return result;
  }
  result.status = QPStatus::optimal;
  result.u_star = {best.x, best.y};
  result.active_set = active_rows_at(best, all);
  return result;
}

QPResult brute_force_qp(const ControlInput& u_ref,
                        const std::vector<LinearConstraintRow>& rows,
                        const BoxBounds& box, double resolution) {
  validate_inputs(u_ref, rows, box);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ValidationError("brute_force_qp: resolution must be > 0");
  }

  QPResult result;
  result.status = QPStatus::infeasible;
  result.u_star = u_ref;

  // A zero row can never be satisfied when b < 0 (checked exactly).
  for (const LinearConstraintRow& r : rows) {
    if (r.a.x == 0.0 && r.a.y == 0.0 && r.b < 0.0) return result;
  }

  long nx = static_cast<long>(std::floor((box.hi.x - box.lo.x) / resolution + 1e-9)) + 1;
  long ny = static_cast<long>(std::floor((box.hi.y - box.lo.y) / resolution + 1e-9)) + 1;
  while (nx > 1 && box.lo.x + (nx - 1) * resolution > box.hi.x) --nx;
  while (ny > 1 && box.lo.y + (ny - 1) * resolution > box.hi.y) --ny;

  bool found = false;
  Vec2 best;
  double best_obj = std::numeric_limits<double>::infinity();

  for (long ix = 0; ix < nx; ++ix) {
    const double x = box.lo.x + ix * resolution;
    long jlo = 0;
    long jhi = ny - 1;
    bool column_ok = true;
    for (const LinearConstraintRow& r : rows) {
      if (r.a.x == 0.0 && r.a.y == 0.0) continue;
      if (r.a.y == 0.0) {
        if (r.a.x * x > r.b) {
          column_ok = false;
          break;
        }
        continue;
      }
      const double ylim = (r.b - r.a.x * x) / r.a.y;
      const auto violates = [&](long j) {
        return r.a.x * x + r.a.y * (box.lo.y + j * resolution) > r.b;
      };
      if (r.a.y > 0.0) {
        jhi = std::min(jhi, static_cast<long>(std::floor(
                                (ylim - box.lo.y) / resolution + 1e-9)));
        while (jhi >= jlo && violates(jhi)) --jhi;
      } else {
        jlo = std::max(jlo, static_cast<long>(std::ceil(
                                (ylim - box.lo.y) / resolution - 1e-9)));
        while (jlo <= jhi && violates(jlo)) ++jlo;
      }
      if (jlo > jhi) {
        column_ok = false;
        break;
      }
    }
    if (!column_ok) continue;

    // Feasible grid rows form the contiguous range [jlo, jhi]; the column
    // optimum is the grid point nearest the unconstrained minimizer.
    const double tj = (u_ref.uy - box.lo.y) / resolution;
    const long jf = std::clamp(static_cast<long>(std::floor(tj)), jlo, jhi);
    const long jc = std::clamp(static_cast<long>(std::floor(tj)) + 1, jlo, jhi);
    for (const long j : {jf, jc}) {
      const Vec2 u{x, box.lo.y + j * resolution};
      const double obj = norm_sq(u - u_ref.vec());
      if (!found || obj < best_obj || (obj == best_obj && lex_less(u, best))) {
        found = true;
        best = u;
        best_obj = obj;
      }
    }
  }

  if (found) {
    result.status = QPStatus::optimal;
    result.u_star = {best.x, best.y};
  }
  return result;
}

std::vector<ObstacleConstraintInfo> evaluate_obstacle_constraints(
    const EgoState& ego, const std::vector<ObstacleState>& obstacles,
    const FilterConfig& cfg) {
  const double ego_heading =
      norm_sq(ego.velocity()) > 0.0 ? std::atan2(ego.vy, ego.vx) : 0.0;
  const PlacedShape ego_shaped{cfg.ego_shape, ego.position(), ego_heading};
  const PlacedShape ego_point{ShapeSpec::make_point(), ego.position(), 0.0};

  std::vector<ObstacleConstraintInfo> infos;
  infos.reserve(obstacles.size());
  for (const ObstacleState& obs : obstacles) {
    ObstacleConstraintInfo info;
    info.id = obs.id;
    const ClosestPair pair = shape_min_distance(ego_shaped, obs.placed());
    info.surface_distance = pair.distance;
    info.d_safe = dynamic_safe_distance(ego_shaped, obs.placed(), cfg.margin);
    const BarrierEval ev = lie_derivatives(ego, obs, info.d_safe, cfg.params);
    info.h = ev.h;
    info.row = cfg.mode == BarrierMode::dhocbf ? dhocbf_row(ev, cfg.params, obs.id)
                                               : hocbf_row(ev, cfg.params, obs.id);
    info.in_range =
        shape_min_distance(ego_point, obs.placed()).distance <= cfg.sensory_radius;
    infos.push_back(std::move(info));
  }
  return infos;
}

std::pair<ControlInput, QPResult> filter_with_constraints(
    const ControlInput& u_ref, const EgoState& ego,
    const std::vector<ObstacleConstraintInfo>& infos, const FilterConfig& cfg) {
  std::vector<LinearConstraintRow> rows;
  for (const ObstacleConstraintInfo& info : infos) {
    if (info.in_range) rows.push_back(info.row);
  }

  QPResult qp = solve_qp2(u_ref, rows, cfg.box);
  if (qp.status == QPStatus::optimal) return {qp.u_star, qp};

  switch (cfg.policy) {
    case InfeasibilityPolicy::error:
      throw InfeasibleError("safety QP infeasible and policy is 'error'");
    case InfeasibilityPolicy::slack: {
      QPResult relaxed = solve_relaxed(u_ref, rows, cfg);
      return {relaxed.u_star, relaxed};
    }
    case InfeasibilityPolicy::max_brake: {
      const auto oppose = [](double v, double lo, double hi) {
        if (v > 0.0) return lo;
        if (v < 0.0) return hi;
        return std::clamp(0.0, lo, hi);
      };
      qp.u_star = {oppose(ego.vx, cfg.box.lo.x, cfg.box.hi.x),
                   oppose(ego.vy, cfg.box.lo.y, cfg.box.hi.y)};
      return {qp.u_star, qp};
    }
  }
  throw ValidationError("unknown infeasibility policy");
}

std::pair<ControlInput, QPResult> filter_control(
    const ControlInput& u_ref, const EgoState& ego,
    const std::vector<ObstacleState>& obstacles, const FilterConfig& cfg) {
  return filter_with_constraints(
      u_ref, ego, evaluate_obstacle_constraints(ego, obstacles, cfg), cfg);
}

}  // namespace dhocbf
