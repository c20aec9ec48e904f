#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dhocbf/dynamics.hpp"
#include "dhocbf/errors.hpp"

using namespace dhocbf;

TEST_CASE("step_ego drifts at constant velocity under zero control") {
  const EgoState next = step_ego({0, 0, 1, 0}, {0, 0}, 0.1);
  CHECK(next.x == doctest::Approx(0.1));
  CHECK(next.y == 0.0);
  CHECK(next.vx == 1.0);
  CHECK(next.vy == 0.0);
}

TEST_CASE("step_ego covers half a t squared from rest") {
  const EgoState next = step_ego({0, 0, 0, 0}, {2, 0}, 1.0);
  CHECK(next.x == doctest::Approx(1.0));
  CHECK(next.vx == doctest::Approx(2.0));
}

TEST_CASE("step_ego rejects dt <= 0 and non-finite input") {
  CHECK_THROWS_AS(step_ego({1, 2, -1, 3}, {0, 0}, 0.0), ValidationError);
  CHECK_THROWS_AS(step_ego({1, 2, -1, 3}, {0, 0}, -0.1), ValidationError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step_ego({nan, 0, 0, 0}, {0, 0}, 0.1), ValidationError);
  CHECK_THROWS_AS(step_ego({0, 0, 0, 0}, {nan, 0}, 0.1), ValidationError);
}

TEST_CASE("step_ego composes exactly for constant control") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const EgoState s{u(rng), u(rng), u(rng), u(rng)};
    const ControlInput c{u(rng), u(rng)};
    const double dt = 0.05 + 0.2 * std::abs(u(rng));
    const EgoState one = step_ego(s, c, dt);
    const EgoState two = step_ego(step_ego(s, c, dt / 2.0), c, dt / 2.0);
    const double scale = std::max(1.0, std::abs(one.x));
    CHECK(std::abs(one.x - two.x) <= 1e-12 * scale);
    CHECK(std::abs(one.y - two.y) <= 1e-12 * std::max(1.0, std::abs(one.y)));
    CHECK(std::abs(one.vx - two.vx) <= 1e-12 * std::max(1.0, std::abs(one.vx)));
    CHECK(std::abs(one.vy - two.vy) <= 1e-12 * std::max(1.0, std::abs(one.vy)));
  }
}

namespace {

ObstacleProfile two_segment_profile() {
  ObstacleProfile p;
  p.id = "obs";
  p.shape = ShapeSpec::make_point();
  p.initial_position = {5.0, 0.0};
  p.segments = {{0.0, {0.0, 0.0}}, {2.0, {-1.0, 0.0}}};
  return p;
}

}  // namespace

TEST_CASE("obstacle_state_at holds position through a stationary segment") {
  const ObstacleState s = obstacle_state_at(two_segment_profile(), 1.0);
  CHECK(s.position.x == doctest::Approx(5.0));
  CHECK(s.velocity.x == 0.0);
}

TEST_CASE("obstacle_state_at integrates the active segment") {
  const ObstacleState s = obstacle_state_at(two_segment_profile(), 3.0);
  CHECK(s.position.x == doctest::Approx(4.0));
  CHECK(s.velocity.x == doctest::Approx(-1.0));
}

TEST_CASE("obstacle_state_at constant velocity") {
  ObstacleProfile p;
  p.id = "obs";
  p.initial_position = {0.0, 0.0};
  p.segments = {{0.0, {2.0, 0.0}}};
  const ObstacleState s = obstacle_state_at(p, 2.5);
  CHECK(s.position.x == doctest::Approx(5.0));
}

TEST_CASE("obstacle_state_at position is continuous across segment switches") {
  ObstacleProfile p;
  p.id = "obs";
  p.initial_position = {1.0, -2.0};
  p.segments = {{0.0, {1.5, 0.5}}, {1.0, {-0.5, 2.0}}, {2.5, {0.0, 0.0}}, {4.0, {3.0, -1.0}}};
  for (const double boundary : {1.0, 2.5, 4.0}) {
    const ObstacleState before = obstacle_state_at(p, boundary - 1e-9);
    const ObstacleState after = obstacle_state_at(p, boundary);
    CHECK(norm(after.position - before.position) <= 1e-8);
  }
}

TEST_CASE("obstacle heading follows velocity and is held when stopped") {
  ObstacleProfile p;
  p.id = "obs";
  p.initial_position = {0.0, 0.0};
  p.segments = {{0.0, {0.0, 0.0}}, {1.0, {0.0, 2.0}}, {2.0, {0.0, 0.0}}};
  CHECK(obstacle_state_at(p, 0.5).heading == 0.0);  // initial default
  CHECK(obstacle_state_at(p, 1.5).heading == doctest::Approx(M_PI / 2.0));
  CHECK(obstacle_state_at(p, 3.0).heading == doctest::Approx(M_PI / 2.0));  // held
}

TEST_CASE("validate_profile rejects malformed scripts") {
  ObstacleProfile p;
  p.id = "bad";
  CHECK_THROWS_AS(validate_profile(p), ValidationError);  // no segments
  p.segments = {{1.0, {0.0, 0.0}}};
  CHECK_THROWS_AS(validate_profile(p), ValidationError);  // first not at 0
  p.segments = {{0.0, {0.0, 0.0}}, {0.0, {1.0, 0.0}}};
  CHECK_THROWS_AS(validate_profile(p), ValidationError);  // not increasing
  p.segments = {{0.0, {0.0, 0.0}}, {1.0, {1.0, 0.0}}};
  CHECK_NOTHROW(validate_profile(p));
}

namespace {

ObstacleState point_obstacle_at(double x, double y) {
  ObstacleState s;
  s.id = "p";
  s.position = {x, y};
  s.shape = ShapeSpec::make_point();
  return s;
}

}  // namespace

TEST_CASE("obstacles_in_range keeps only nearby obstacles") {
  const EgoState ego{0, 0, 0, 0};
  const std::vector<ObstacleState> all{point_obstacle_at(3, 0), point_obstacle_at(20, 0)};
  const auto in_range = obstacles_in_range(ego, all, 8.0);
  REQUIRE(in_range.size() == 1);
  CHECK(in_range[0].position.x == 3.0);
}

TEST_CASE("obstacles_in_range on the empty list") {
  CHECK(obstacles_in_range({0, 0, 0, 0}, {}, 8.0).empty());
}

TEST_CASE("obstacles_in_range includes the boundary") {
  const auto in_range =
      obstacles_in_range({0, 0, 0, 0}, {point_obstacle_at(8, 0)}, 8.0);
  CHECK(in_range.size() == 1);
}

TEST_CASE("obstacles_in_range is a monotone subset of its input") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ObstacleState> all;
    for (int i = 0; i < 6; ++i) all.push_back(point_obstacle_at(u(rng), u(rng)));
    const EgoState ego{u(rng), u(rng), 0, 0};
    const auto small = obstacles_in_range(ego, all, 4.0);
    const auto large = obstacles_in_range(ego, all, 9.0);
    CHECK(small.size() <= large.size());
    // every member of the small set appears in the large set, order preserved
    std::size_t j = 0;
    for (const ObstacleState& s : small) {
      while (j < large.size() && !(large[j].position == s.position)) ++j;
      CHECK(j < large.size());
    }
  }
}
