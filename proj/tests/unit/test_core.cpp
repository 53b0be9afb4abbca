#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vruik/core.hpp"
#include "vruik/error.hpp"

using namespace vruik;

TEST_CASE("iou on simple boxes") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0).epsilon(1e-12));
  // touching edges share no area
  CHECK(iou({0, 0, 10, 10}, {10, 0, 20, 10}) == 0.0);
}

TEST_CASE("iou rejects degenerate boxes") {
  CHECK_THROWS_AS(iou({0, 0, 0, 10}, {0, 0, 10, 10}), InvalidGeometry);
  CHECK_THROWS_AS(iou({0, 0, 10, 10}, {5, 5, 4, 8}), InvalidGeometry);
  CHECK_THROWS_AS(iou({0, 0, std::numeric_limits<double>::infinity(), 10}, {0, 0, 10, 10}), InvalidGeometry);
}

TEST_CASE("iou properties against the pixel-count oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pos(0, 80), size(1, 64);
  for (int trial = 0; trial < 300; ++trial) {
    const int ax = pos(rng), ay = pos(rng), aw = size(rng), ah = size(rng);
    const int bx = pos(rng), by = pos(rng), bw = size(rng), bh = size(rng);
    const BoundingBox a{double(ax), double(ay), double(ax + aw), double(ay + ah)};
    const BoundingBox b{double(bx), double(by), double(bx + bw), double(by + bh)};
    const double expected = oracle::pixel_iou(ax, ay, ax + aw, ay + ah, bx, by, bx + bw, by + bh);
    CHECK(std::abs(iou(a, b) - expected) <= 1e-6);
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, a) == 1.0);
    const BoundingBox far{a.x1 + 200, a.y1, a.x2 + 200, a.y2};
    CHECK(iou(a, far) == 0.0);
  }
}

TEST_CASE("visible fraction") {
  const FrameSize frame{100, 100};
  CHECK(visible_fraction({10, 10, 20, 20}, frame) == 1.0);
  CHECK(visible_fraction({-10, 0, 10, 10}, frame) == doctest::Approx(0.5));
  CHECK(visible_fraction({200, 200, 210, 210}, frame) == 0.0);
  CHECK(visible_fraction({0, 0, 100, 100}, frame) == 1.0);
  CHECK(visible_fraction({0, 0, 100, 101}, frame) < 1.0);
  CHECK_THROWS_AS(visible_fraction({0, 0, 0, 0}, frame), InvalidGeometry);
}

TEST_CASE("center") {
  CHECK(center({0, 0, 10, 10}) == Point2{5, 5});
  CHECK(center({1085, 782, 1148, 935}) == Point2{1116.5, 858.5});
  CHECK(center({0, 0, 1, 1}) == Point2{0.5, 0.5});
}

TEST_CASE("label vocabulary round-trips") {
  for (auto v : {LateralIntent::stationary, LateralIntent::goes_to_the_left, LateralIntent::goes_to_the_right})
    CHECK(parse_lateral(to_string(v)) == v);
  for (auto v : {VerticalIntent::stationary, VerticalIntent::moves_towards_ego_vehicle,
                 VerticalIntent::moves_away_from_ego_vehicle})
    CHECK(parse_vertical(to_string(v)) == v);
  for (auto v : {RelativePosition::left, RelativePosition::right, RelativePosition::front})
    CHECK(parse_position(to_string(v)) == v);
  CHECK(to_string(LateralIntent::goes_to_the_left) == "goes to the left");
  CHECK(parse_lateral("goes_to_the_left") == LateralIntent::goes_to_the_left);
  CHECK(parse_vertical("moves towards ego vehicle") == VerticalIntent::moves_towards_ego_vehicle);
  CHECK(parse_position("Front") == RelativePosition::front);
  CHECK_FALSE(parse_lateral("sideways").has_value());
  CHECK(parse_object_class("cycle") == ObjectClass::bicycle);
  CHECK(parse_object_class("cyclist") == ObjectClass::cyclist);
  CHECK_FALSE(parse_object_class("car").has_value());
}

TEST_CASE("track validation") {
  Track t{"a", ObjectClass::person, {{0, {0, 0, 10, 10}, 0.9}, {1, {1, 0, 11, 10}, 0.8}}};
  CHECK_NOTHROW(validate_track(t));
  t.observations[1].frame = 0;
  CHECK_THROWS_AS(validate_track(t), InvalidInput);
  t.observations[1].frame = 2;
  t.observations[1].confidence = 1.5;
  CHECK_THROWS_AS(validate_track(t), InvalidInput);
  CHECK_THROWS_AS(validate_track(Track{"e", ObjectClass::person, {}}), InvalidInput);
}

TEST_CASE("observation lookup") {
  const Track t{"a", ObjectClass::person, {{2, {0, 0, 1, 1}, 1}, {5, {1, 1, 2, 2}, 1}}};
  CHECK(observation_at_or_before(t, 1) == nullptr);
  CHECK(observation_at_or_before(t, 4)->frame == 2);
  CHECK(observation_at_or_before(t, 9)->frame == 5);
}
