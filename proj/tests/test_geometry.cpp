#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dhocbf/errors.hpp"
#include "dhocbf/geometry.hpp"

using namespace dhocbf;

namespace {

constexpr double kPi = 3.14159265358979323846;

PlacedShape square(Vec2 center, double half_extent, double heading = 0.0) {
  return {ShapeSpec::make_rectangle(2.0 * half_extent, 2.0 * half_extent), center,
          heading};
}

bool contains_point(const std::array<Vec2, 4>& corners, Vec2 p, double tol) {
  for (const Vec2& c : corners) {
    if (std::abs(c.x - p.x) <= tol && std::abs(c.y - p.y) <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("rect_corners axis-aligned square") {
  const auto corners = rect_corners({{0.0, 0.0}, 2.0, 2.0, 0.0});
  for (const Vec2 expected : {Vec2{1, 1}, Vec2{-1, 1}, Vec2{-1, -1}, Vec2{1, -1}}) {
    CHECK(contains_point(corners, expected, 1e-12));
  }
  // CCW order via the shoelace sum.
  double area2 = 0.0;
  for (int i = 0; i < 4; ++i) area2 += cross(corners[i], corners[(i + 1) % 4]);
  CHECK(area2 > 0.0);
}

TEST_CASE("rect_corners quarter turn of a square maps onto the same point set") {
  const auto corners = rect_corners({{0.0, 0.0}, 2.0, 2.0, kPi / 2.0});
  for (const Vec2 expected : {Vec2{1, 1}, Vec2{-1, 1}, Vec2{-1, -1}, Vec2{1, -1}}) {
    CHECK(contains_point(corners, expected, 1e-12));
  }
}

TEST_CASE("rect_corners translation") {
  const auto corners = rect_corners({{3.0, 0.0}, 2.0, 4.0, 0.0});
  double min_x = 1e300;
  double max_x = -1e300;
  for (const Vec2& c : corners) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
  }
  CHECK(min_x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_x == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("rect_corners commutes with rotation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const OrientedBox base{{u(rng), u(rng)}, 1.0 + 0.5 * u(rng), 2.0 + u(rng), 0.0};
    const double phi = 3.0 * u(rng);
    OrientedBox turned = base;
    turned.heading = phi;
    turned.center = rotated(base.center, phi);
    const auto direct = rect_corners(turned);
    const auto via_rotation = rect_corners(base);
    for (int c = 0; c < 4; ++c) {
      const Vec2 expect = rotated(via_rotation[c], phi);
      CHECK(std::abs(direct[c].x - expect.x) <= 1e-12);
      CHECK(std::abs(direct[c].y - expect.y) <= 1e-12);
    }
  }
}

TEST_CASE("point_segment_closest interior foot") {
  const auto res = point_segment_closest({1, 1}, {0, 0}, {2, 0});
  CHECK(res.r == doctest::Approx(0.5));
  CHECK(res.p_surf.x == doctest::Approx(1.0));
  CHECK(res.p_surf.y == doctest::Approx(0.0));
  CHECK(res.distance == doctest::Approx(1.0));
}

TEST_CASE("point_segment_closest clamps beyond the far endpoint") {
  const auto res = point_segment_closest({3, 0}, {0, 0}, {2, 0});
  CHECK(res.r == doctest::Approx(1.5));
  CHECK(res.p_surf.x == doctest::Approx(2.0));
  CHECK(res.distance == doctest::Approx(1.0));
}

TEST_CASE("point_segment_closest clamps before the near endpoint") {
  const auto res = point_segment_closest({-1, 2}, {0, 0}, {2, 0});
  CHECK(res.r < 0.0);
  CHECK(res.p_surf.x == doctest::Approx(0.0));
  CHECK(res.distance == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("point_segment_closest degenerate segment is point distance") {
  const auto res = point_segment_closest({3, 4}, {0, 0}, {0, 0});
  CHECK(res.r == 0.0);
  CHECK(res.distance == doctest::Approx(5.0));
}

TEST_CASE("corner_edge_distance equals the segment distance") {
  CHECK(corner_edge_distance({1, 1}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
  CHECK(corner_edge_distance({3, 0}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
  CHECK(corner_edge_distance({-1, 2}, {0, 0}, {2, 0}) ==
        doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("corner_edge_distance interior case matches |A1B1| sin(angle)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int tested = 0;
  while (tested < 30) {
    const Vec2 a1{u(rng), u(rng)};
    const Vec2 a2{u(rng), u(rng)};
    const Vec2 b1{u(rng), u(rng)};
    if (norm(a2 - a1) < 0.5) continue;
    const double r = dot(b1 - a1, a2 - a1) / norm_sq(a2 - a1);
    if (r <= 0.05 || r >= 0.95) continue;  // interior case only
    const double lhs = corner_edge_distance(b1, a1, a2);
    const double cosang = dot(b1 - a1, a2 - a1) / (norm(b1 - a1) * norm(a2 - a1));
    const double sinang = std::sqrt(std::max(0.0, 1.0 - cosang * cosang));
    CHECK(lhs == doctest::Approx(norm(b1 - a1) * sinang).epsilon(1e-9));
    ++tested;
  }
}

TEST_CASE("corner_edge_distance is zero on the segment") {
  CHECK(corner_edge_distance({1, 0}, {0, 0}, {2, 0}) == doctest::Approx(0.0));
}

TEST_CASE("shape_min_distance axis-aligned squares") {
  const auto pair = shape_min_distance(square({0, 0}, 1.0), square({4, 0}, 1.0));
  CHECK(pair.distance == doctest::Approx(2.0));
  CHECK(pair.penetration == 0.0);
  CHECK(pair.point_on_a.x == doctest::Approx(1.0));
  CHECK(pair.point_on_a.y == doctest::Approx(0.0));
  CHECK(pair.point_on_b.x == doctest::Approx(3.0));
  CHECK(pair.point_on_b.y == doctest::Approx(0.0));
}

TEST_CASE("shape_min_distance overlapping squares report the translation depth") {
  const auto pair = shape_min_distance(square({0, 0}, 1.0), square({1, 0}, 1.0));
  CHECK(pair.distance == 0.0);
  CHECK(pair.penetration == doctest::Approx(1.0));
}

TEST_CASE("shape_min_distance square vs rotated square") {
  // Rotated by pi/4, the second square points a corner at the first one's
  // right edge: gap is 3 - sqrt(2).
  const auto pair =
      shape_min_distance(square({0, 0}, 1.0), square({4, 0}, 1.0, kPi / 4.0));
  const double expected = 1.5857864376269049;
  CHECK(pair.distance == doctest::Approx(expected).epsilon(1e-12));
  const double sampled = sampled_boundary_distance(
      square({0, 0}, 1.0), square({4, 0}, 1.0, kPi / 4.0), 10000);
  CHECK(std::abs(sampled - expected) <= 1e-3);
}

TEST_CASE("shape_min_distance circles") {
  const PlacedShape a{ShapeSpec::make_circle(1.0), {0, 0}, 0.0};
  const PlacedShape b{ShapeSpec::make_circle(2.0), {5, 0}, 0.0};
  const auto pair = shape_min_distance(a, b);
  CHECK(pair.distance == doctest::Approx(2.0));
  CHECK(pair.point_on_a.x == doctest::Approx(1.0));
  CHECK(pair.point_on_b.x == doctest::Approx(3.0));

  const PlacedShape c{ShapeSpec::make_circle(2.0), {1, 0}, 0.0};
  const auto overlap = shape_min_distance(a, c);
  CHECK(overlap.distance == 0.0);
  CHECK(overlap.penetration == doctest::Approx(2.0));
}

TEST_CASE("shape_min_distance point vs rectangle") {
  const PlacedShape p{ShapeSpec::make_point(), {5, 0}, 0.0};
  const auto pair = shape_min_distance(p, square({0, 0}, 1.0));
  CHECK(pair.distance == doctest::Approx(4.0));
  CHECK(pair.point_on_b.x == doctest::Approx(1.0));

  const PlacedShape inside{ShapeSpec::make_point(), {0.5, 0}, 0.0};
  const auto pen = shape_min_distance(inside, square({0, 0}, 1.0));
  CHECK(pen.distance == 0.0);
  CHECK(pen.penetration == doctest::Approx(0.5));
}

TEST_CASE("shape_min_distance symmetric under argument swap") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    PlacedShape a;
    PlacedShape b;
    a.shape = ShapeSpec::make_rectangle(0.5 + u(rng), 0.5 + 2.0 * u(rng));
    b.shape = u(rng) < 0.5
                  ? ShapeSpec::make_rectangle(0.5 + u(rng), 0.5 + 2.0 * u(rng))
                  : ShapeSpec::make_circle(0.3 + u(rng));
    a.position = {4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0};
    b.position = {8.0 * u(rng) - 4.0, 8.0 * u(rng) - 4.0};
    a.heading = 7.0 * u(rng);
    b.heading = 7.0 * u(rng);
    const auto ab = shape_min_distance(a, b);
    const auto ba = shape_min_distance(b, a);
    CHECK(ab.distance == ba.distance);
    CHECK(ab.penetration == ba.penetration);
    CHECK(ab.point_on_a == ba.point_on_b);
    CHECK(ab.point_on_b == ba.point_on_a);
    // At most one of distance and penetration is positive.
    CHECK(!(ab.distance > 0.0 && ab.penetration > 0.0));
  }
}

TEST_CASE("dynamic_safe_distance circle pair is the radius sum plus margin") {
  const PlacedShape a{ShapeSpec::make_circle(1.0), {0, 0}, 0.0};
  const PlacedShape b{ShapeSpec::make_circle(1.0), {5, 0}, 0.0};
  CHECK(dynamic_safe_distance(a, b, 0.0) == doctest::Approx(2.0));
  CHECK(dynamic_safe_distance(a, b, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("dynamic_safe_distance squares four apart") {
  // Closest points are collinear with the centers: projected gap 2, d_safe 2.
  CHECK(dynamic_safe_distance(square({0, 0}, 1.0), square({4, 0}, 1.0), 0.0) ==
        doctest::Approx(2.0));
}

TEST_CASE("dynamic_safe_distance overlap forces a negative barrier") {
  const PlacedShape a = square({0, 0}, 1.0);
  const PlacedShape b = square({1, 0}, 1.0);
  const double d_safe = dynamic_safe_distance(a, b, 0.0);
  CHECK(d_safe == doctest::Approx(2.0));  // center distance 1 + penetration 1
  CHECK(d_safe > norm(b.position - a.position));
}

TEST_CASE("dynamic_safe_distance coincident centers flags a violation") {
  const PlacedShape a = square({0, 0}, 1.0);
  const PlacedShape b = square({0, 0}, 0.5, 0.3);
  const double d_safe = dynamic_safe_distance(a, b, 0.25);
  CHECK(d_safe > 0.0);  // center distance is zero, so h < 0 downstream
  CHECK(d_safe == doctest::Approx(std::hypot(2.0, 2.0) / 2.0 + 0.25));
}

TEST_CASE("circle barrier sign is equivalent to the margin test") {
  // h = |c|^2 - d_safe^2 >= 0  iff  surface distance >= margin, exactly.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const PlacedShape a{ShapeSpec::make_circle(0.2 + u(rng)), {u(rng), u(rng)}, 0.0};
    const PlacedShape b{ShapeSpec::make_circle(0.2 + u(rng)),
                        {6.0 * u(rng) - 1.0, 6.0 * u(rng) - 1.0},
                        0.0};
    const double margin = u(rng);
    const double center = norm(b.position - a.position);
    if (center < 1e-9) continue;
    const double d_safe = dynamic_safe_distance(a, b, margin);
    const double h = center * center - d_safe * d_safe;
    const double surface = center - a.shape.radius - b.shape.radius;
    CHECK((h >= 0.0) == (surface >= margin));
  }
}

TEST_CASE("rectangle barrier sign implies the margin along the center line") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  while (tested < 200) {
    const PlacedShape a{ShapeSpec::make_rectangle(0.5 + u(rng), 0.5 + u(rng)),
                        {0.0, 0.0},
                        7.0 * u(rng)};
    const PlacedShape b{ShapeSpec::make_rectangle(0.5 + u(rng), 0.5 + u(rng)),
                        {6.0 * u(rng) - 3.0, 6.0 * u(rng) - 3.0},
                        7.0 * u(rng)};
    const auto pair = shape_min_distance(a, b);
    if (pair.penetration > 0.0 || norm(b.position) < 0.5) continue;
    const double margin = 0.3 * u(rng);
    const double center = norm(b.position - a.position);
    const double d_safe = dynamic_safe_distance(a, b, margin);
    const double h = center * center - d_safe * d_safe;
    if (h >= 0.0) {
      CHECK(pair.distance >= margin - 1e-9);
    }
    ++tested;
  }
}

TEST_CASE("sampled_boundary_distance tracks the exact distance on random pairs") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  while (tested < 100) {
    const PlacedShape a{
        ShapeSpec::make_rectangle(0.5 + 1.5 * u(rng), 0.5 + 1.5 * u(rng)),
        {2.0 * u(rng), 2.0 * u(rng)},
        7.0 * u(rng)};
    const double ang = 6.2831853 * u(rng);
    const double dist = 2.5 + 4.0 * u(rng);
    const PlacedShape b{
        ShapeSpec::make_rectangle(0.5 + 1.5 * u(rng), 0.5 + 1.5 * u(rng)),
        a.position + Vec2{dist * std::cos(ang), dist * std::sin(ang)},
        7.0 * u(rng)};
    const auto pair = shape_min_distance(a, b);
    if (pair.penetration > 0.0) continue;
    const double sampled = sampled_boundary_distance(a, b, 10000);
    CHECK(std::abs(pair.distance - sampled) <= 1e-3);
    ++tested;
  }
}

TEST_CASE("validate_shape rejects bad shapes") {
  CHECK_THROWS_AS(validate_shape(ShapeSpec::make_circle(-1.0)), ValidationError);
  CHECK_THROWS_AS(validate_shape(ShapeSpec::make_rectangle(0.0, 1.0)), ValidationError);
  CHECK_NOTHROW(validate_shape(ShapeSpec::make_point()));
}
