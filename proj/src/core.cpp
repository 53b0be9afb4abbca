#include "vruik/core.hpp"

#include <algorithm>
#include <cmath>

#include "vruik/error.hpp"

namespace vruik {

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error([&] {
        std::string msg = "validation failed with " + std::to_string(issues.size()) + " issue(s)";
        if (!issues.empty()) {
          const auto& first = issues.front();
          msg += "; first: " + first.sample_id + "/" + first.field_path + ": " + first.message;
        }
        return msg;
      }()),
      issues_(std::move(issues)) {}

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x1 < x2 && y1 < y2;
}

std::string_view to_string(ObjectClass c) noexcept {
  switch (c) {
    case ObjectClass::person: return "person";
    case ObjectClass::bicycle: return "bicycle";
    case ObjectClass::cyclist: return "cyclist";
  }
  return "person";
}

std::optional<ObjectClass> parse_object_class(std::string_view s) noexcept {
  if (s == "person") return ObjectClass::person;
  if (s == "bicycle" || s == "cycle") return ObjectClass::bicycle;
  if (s == "cyclist") return ObjectClass::cyclist;
  return std::nullopt;
}

void validate_track(const Track& track) {
  if (track.observations.empty()) throw InvalidInput("track '" + track.id + "' has no observations");
  for (std::size_t i = 0; i < track.observations.size(); ++i) {
    const auto& obs = track.observations[i];
    if (!obs.box.valid()) throw InvalidInput("track '" + track.id + "' has an invalid box");
    if (!(obs.confidence >= 0.0 && obs.confidence <= 1.0))
      throw InvalidInput("track '" + track.id + "' has confidence outside [0,1]");
    if (i > 0 && obs.frame <= track.observations[i - 1].frame)
      throw InvalidInput("track '" + track.id + "' frames are not strictly increasing");
  }
}

const Observation* observation_at_or_before(const Track& track, int frame) noexcept {
  auto it = std::upper_bound(track.observations.begin(), track.observations.end(), frame,
                             [](int f, const Observation& o) { return f < o.frame; });
  if (it == track.observations.begin()) return nullptr;
  return &*std::prev(it);
}

std::string_view to_string(LateralIntent v) noexcept {
  switch (v) {
    case LateralIntent::stationary: return "stationary";
    case LateralIntent::goes_to_the_left: return "goes to the left";
    case LateralIntent::goes_to_the_right: return "goes to the right";
  }
  return "stationary";
}

std::string_view to_string(VerticalIntent v) noexcept {
  switch (v) {
    case VerticalIntent::stationary: return "stationary";
    case VerticalIntent::moves_towards_ego_vehicle: return "moves towards ego vehicle";
    case VerticalIntent::moves_away_from_ego_vehicle: return "moves away from ego vehicle";
  }
  return "stationary";
}

std::string_view to_string(RelativePosition v) noexcept {
  switch (v) {
    case RelativePosition::left: return "Left";
    case RelativePosition::right: return "Right";
    case RelativePosition::front: return "Front";
  }
  return "Front";
}

namespace {

std::string underscored(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

}  // namespace

std::optional<LateralIntent> parse_lateral(std::string_view s) noexcept {
  for (auto v : {LateralIntent::stationary, LateralIntent::goes_to_the_left,
                 LateralIntent::goes_to_the_right}) {
    if (s == to_string(v) || s == underscored(to_string(v))) return v;
  }
  return std::nullopt;
}

std::optional<VerticalIntent> parse_vertical(std::string_view s) noexcept {
  for (auto v : {VerticalIntent::stationary, VerticalIntent::moves_towards_ego_vehicle,
                 VerticalIntent::moves_away_from_ego_vehicle}) {
    if (s == to_string(v) || s == underscored(to_string(v))) return v;
  }
  return std::nullopt;
}

std::optional<RelativePosition> parse_position(std::string_view s) noexcept {
  if (s == "Left") return RelativePosition::left;
  if (s == "Right") return RelativePosition::right;
  if (s == "Front") return RelativePosition::front;
  return std::nullopt;
}

void require_valid(const BoundingBox& box) {
  if (!box.valid()) {
    throw InvalidGeometry("invalid box [" + std::to_string(box.x1) + ", " + std::to_string(box.y1) +
                          ", " + std::to_string(box.x2) + ", " + std::to_string(box.y2) + "]");
  }
}

std::optional<BoundingBox> intersection(const BoundingBox& a, const BoundingBox& b) noexcept {
  BoundingBox r{std::max(a.x1, b.x1), std::max(a.y1, b.y1), std::min(a.x2, b.x2),
                std::min(a.y2, b.y2)};
  if (r.x1 < r.x2 && r.y1 < r.y2) return r;
  return std::nullopt;
}

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) noexcept {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

BoundingBox clip_to_frame(const BoundingBox& box, FrameSize frame) noexcept {
  return {std::clamp(box.x1, 0.0, double(frame.width)), std::clamp(box.y1, 0.0, double(frame.height)),
          std::clamp(box.x2, 0.0, double(frame.width)), std::clamp(box.y2, 0.0, double(frame.height))};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  require_valid(a);
  require_valid(b);
  const auto inter = intersection(a, b);
  if (!inter) return 0.0;
  const double i = inter->area();
  return i / (a.area() + b.area() - i);
}

double visible_fraction(const BoundingBox& box, FrameSize frame) {
  require_valid(box);
  if (!frame.valid()) throw InvalidInput("frame size must be positive");
  const auto inside = intersection(box, BoundingBox{0.0, 0.0, double(frame.width), double(frame.height)});
  if (!inside) return 0.0;
  return std::min(1.0, inside->area() / box.area());
}

Point2 center(const BoundingBox& box) noexcept {
  return {(box.x1 + box.x2) / 2.0, (box.y1 + box.y2) / 2.0};
}

}  // namespace vruik
