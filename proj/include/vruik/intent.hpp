#pragma once

#include <map>
#include <optional>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/egomotion.hpp"

namespace vruik {

struct IntentConfig {
  std::vector<int> windows{5, 10, 15};
  double lateral_deadband_px{2.0};
  double lateral_deadband_frac_of_width{0.05};
  double vertical_scale_ratio_eps{0.02};
  double vertical_deadband_px{2.0};
  int min_track_len{3};
  double left_boundary_frac{1.0 / 3.0};
  double right_boundary_frac{2.0 / 3.0};

  void validate() const;
};

/// Camera displacement keyed by frame t (motion from t to t+1).
using CameraTrack = std::map<int, CameraDisplacement>;

struct WindowDisplacement {
  int window{0};
  int first_frame{0};
  int last_frame{0};
  double dx_road{0.0};
  double dy_road{0.0};
  double scale_ratio{1.0};  // box height at window end / at window start
  double end_box_width{0.0};
  bool missing_camera{false};  // some frame lacked a camera estimate (taken as zero)
};

/// Road-relative center displacement over the observations with
/// frame >= last_frame - window. nullopt when fewer than two observations
/// fall in the window.
std::optional<WindowDisplacement> window_displacement(const Track& track, int window,
                                                      const CameraTrack& camera);

LateralIntent classify_lateral(double dx_road, double box_width, const IntentConfig& config = {});

/// Scale change takes precedence over vertical image motion. Throws
/// InvalidInput for a non-positive scale ratio.
VerticalIntent classify_vertical(double dy_road, double scale_ratio, const IntentConfig& config = {});

RelativePosition classify_position(double center_x, FrameSize frame, const IntentConfig& config = {});

struct WindowVote {
  int window{0};
  LateralIntent lateral{LateralIntent::stationary};
  VerticalIntent vertical{VerticalIntent::stationary};
};

struct IntentResult {
  IntentLabel label;
  RelativePosition position{RelativePosition::front};
  std::vector<WindowVote> votes;
  double road_relative_dx{0.0};  // over the longest evaluated window
  double road_relative_dy{0.0};
  bool missing_camera{false};
};

/// Plurality vote over the windows that have data; a tie goes to the
/// longest evaluated window among the tied labels. Tracks shorter than
/// min_track_len, or with no usable window, are labelled stationary.
IntentResult infer_intent(const Track& track, const CameraTrack& camera, FrameSize frame,
                          const IntentConfig& config = {});

}  // namespace vruik
