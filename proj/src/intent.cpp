#include "vruik/intent.hpp"

#include <algorithm>
#include <cmath>

#include "vruik/error.hpp"

namespace vruik {

void IntentConfig::validate() const {
  if (windows.empty()) throw InvalidInput("at least one intent window is required");
  for (int w : windows)
    if (w < 2) throw InvalidInput("intent windows must be >= 2 frames");
  if (lateral_deadband_px < 0.0 || lateral_deadband_frac_of_width < 0.0 || vertical_deadband_px < 0.0 ||
      vertical_scale_ratio_eps < 0.0) {
    throw InvalidInput("intent deadbands must be >= 0");
  }
  if (!(0.0 < left_boundary_frac && left_boundary_frac < right_boundary_frac && right_boundary_frac < 1.0))
    throw InvalidInput("position boundaries must satisfy 0 < left < right < 1");
}

std::optional<WindowDisplacement> window_displacement(const Track& track, int window,
                                                      const CameraTrack& camera) {
  if (track.observations.empty()) return std::nullopt;
  const auto& last = track.observations.back();
  const int start = last.frame - window;
  auto first = std::lower_bound(track.observations.begin(), track.observations.end(), start,
                                [](const Observation& o, int f) { return o.frame < f; });
  if (std::distance(first, track.observations.end()) < 2) return std::nullopt;

  WindowDisplacement out;
  out.window = window;
  out.first_frame = first->frame;
  out.last_frame = last.frame;
  const Point2 c0 = center(first->box);
  const Point2 c1 = center(last.box);
  CameraDisplacement cam_sum;
  for (int f = first->frame; f < last.frame; ++f) {
    auto it = camera.find(f);
    if (it == camera.end()) {
      out.missing_camera = true;
      continue;
    }
    cam_sum.dx += it->second.dx;
    cam_sum.dy += it->second.dy;
  }
  const Point2 road = road_relative_displacement({c1.x - c0.x, c1.y - c0.y}, cam_sum);
  out.dx_road = road.x;
  out.dy_road = road.y;
  out.scale_ratio = last.box.height() / first->box.height();
  out.end_box_width = last.box.width();
  return out;
}

LateralIntent classify_lateral(double dx_road, double box_width, const IntentConfig& config) {
  const double deadband =
      std::max(config.lateral_deadband_px, config.lateral_deadband_frac_of_width * box_width);
  if (std::abs(dx_road) < deadband) return LateralIntent::stationary;
  return dx_road > 0.0 ? LateralIntent::goes_to_the_right : LateralIntent::goes_to_the_left;
}

VerticalIntent classify_vertical(double dy_road, double scale_ratio, const IntentConfig& config) {
  if (!(scale_ratio > 0.0)) throw InvalidInput("scale ratio must be positive");
  if (scale_ratio > 1.0 + config.vertical_scale_ratio_eps) return VerticalIntent::moves_towards_ego_vehicle;
  if (scale_ratio < 1.0 - config.vertical_scale_ratio_eps) return VerticalIntent::moves_away_from_ego_vehicle;
  if (dy_road > config.vertical_deadband_px) return VerticalIntent::moves_towards_ego_vehicle;
  if (dy_road < -config.vertical_deadband_px) return VerticalIntent::moves_away_from_ego_vehicle;
  return VerticalIntent::stationary;
}

RelativePosition classify_position(double center_x, FrameSize frame, const IntentConfig& config) {
  if (center_x < config.left_boundary_frac * frame.width) return RelativePosition::left;
  if (center_x > config.right_boundary_frac * frame.width) return RelativePosition::right;
  return RelativePosition::front;
}

namespace {

// `votes` ordered by ascending window length.
template <typename Label>
Label plurality(const std::vector<Label>& votes) {
  int counts[3] = {0, 0, 0};
  for (Label v : votes) ++counts[static_cast<int>(v)];
  const int best = *std::max_element(std::begin(counts), std::end(counts));
  for (auto it = votes.rbegin(); it != votes.rend(); ++it) {
    if (counts[static_cast<int>(*it)] == best) return *it;
  }
  return Label{};
}

}  // namespace

IntentResult infer_intent(const Track& track, const CameraTrack& camera, FrameSize frame,
                          const IntentConfig& config) {
  if (track.observations.empty()) throw InvalidInput("cannot infer intent of an empty track");
  IntentResult result;
  result.position = classify_position(center(track.observations.back().box).x, frame, config);
  if (static_cast<int>(track.observations.size()) < config.min_track_len) return result;

  std::vector<int> windows = config.windows;
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());

  std::vector<LateralIntent> lateral;
  std::vector<VerticalIntent> vertical;
  for (int w : windows) {
    const auto disp = window_displacement(track, w, camera);
    if (!disp) continue;
    WindowVote vote{w, classify_lateral(disp->dx_road, disp->end_box_width, config),
                    classify_vertical(disp->dy_road, disp->scale_ratio, config)};
    result.votes.push_back(vote);
    lateral.push_back(vote.lateral);
    vertical.push_back(vote.vertical);
    result.road_relative_dx = disp->dx_road;
    result.road_relative_dy = disp->dy_road;
    result.missing_camera = result.missing_camera || disp->missing_camera;
  }
  if (result.votes.empty()) return result;
  result.label = {plurality(lateral), plurality(vertical)};
  return result;
}

}  // namespace vruik
