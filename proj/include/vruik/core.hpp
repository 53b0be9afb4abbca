#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vruik {

struct Point2 {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Axis-aligned box in continuous pixel coordinates (origin top-left).
/// Area is (x2 - x1) * (y2 - y1); a box is valid when that area is positive
/// and every coordinate is finite.
struct BoundingBox {
  double x1{0.0};
  double y1{0.0};
  double x2{0.0};
  double y2{0.0};

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  bool valid() const noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct FrameSize {
  int width{0};
  int height{0};

  bool valid() const noexcept { return width > 0 && height > 0; }

  friend bool operator==(const FrameSize&, const FrameSize&) = default;
};

enum class ObjectClass { person, bicycle, cyclist };

std::string_view to_string(ObjectClass c) noexcept;
/// Accepts "person", "bicycle" (alias "cycle") and "cyclist".
std::optional<ObjectClass> parse_object_class(std::string_view s) noexcept;

struct Observation {
  int frame{0};
  BoundingBox box;
  double confidence{1.0};

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Track {
  std::string id;
  ObjectClass object_class{ObjectClass::person};
  std::vector<Observation> observations;

  int first_frame() const { return observations.front().frame; }
  int last_frame() const { return observations.back().frame; }

  friend bool operator==(const Track&, const Track&) = default;
};

/// Throws InvalidInput when the track is empty, frames are not strictly
/// increasing, a box is invalid or a confidence lies outside [0, 1].
void validate_track(const Track& track);

/// Latest observation whose frame is <= `frame`, or nullptr.
const Observation* observation_at_or_before(const Track& track, int frame) noexcept;

enum class LateralIntent { stationary, goes_to_the_left, goes_to_the_right };
enum class VerticalIntent { stationary, moves_towards_ego_vehicle, moves_away_from_ego_vehicle };

struct IntentLabel {
  LateralIntent lateral{LateralIntent::stationary};
  VerticalIntent vertical{VerticalIntent::stationary};

  friend bool operator==(const IntentLabel&, const IntentLabel&) = default;
};

enum class RelativePosition { left, right, front };

// Dataset vocabulary ("goes to the left", "moves towards ego vehicle", "Left", ...).
std::string_view to_string(LateralIntent v) noexcept;
std::string_view to_string(VerticalIntent v) noexcept;
std::string_view to_string(RelativePosition v) noexcept;
// Parsers also accept the underscored identifiers ("goes_to_the_left").
std::optional<LateralIntent> parse_lateral(std::string_view s) noexcept;
std::optional<VerticalIntent> parse_vertical(std::string_view s) noexcept;
std::optional<RelativePosition> parse_position(std::string_view s) noexcept;

/// Throws InvalidGeometry unless the box is valid.
void require_valid(const BoundingBox& box);

double iou(const BoundingBox& a, const BoundingBox& b);

/// Fraction of the box area lying inside [0, width] x [0, height].
double visible_fraction(const BoundingBox& box, FrameSize frame);

Point2 center(const BoundingBox& box) noexcept;

/// Overlap of two boxes; nullopt unless the overlap has positive area.
std::optional<BoundingBox> intersection(const BoundingBox& a, const BoundingBox& b) noexcept;
BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) noexcept;
BoundingBox clip_to_frame(const BoundingBox& box, FrameSize frame) noexcept;

}  // namespace vruik
