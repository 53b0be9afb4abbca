#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/datasetio.hpp"
#include "vruik/egomotion.hpp"
#include "vruik/intent.hpp"

namespace vruik {

/// Flow fields keyed by frame t (motion from t to t+1). Frames may share one
/// raster.
using FlowSequence = std::map<int, std::shared_ptr<const FlowField>>;

struct SynthAgent {
  ObjectClass object_class{ObjectClass::person};
  BoundingBox initial_box;
  Point2 road_velocity;     // px/frame, relative to the road
  double scale_rate{0.0};   // fractional size change per frame
};

struct Fragmentation {
  int split_frame{0};
  int gap{1};
};

struct SynthScenario {
  std::uint64_t seed{0};
  FrameSize frame{1928, 1280};
  int n_frames{20};
  Point2 camera_velocity;
  std::vector<SynthAgent> agents;
  std::optional<Fragmentation> fragmentation;  // applied to every agent
  double noise_sigma{0.0};

  /// Throws ScenarioInvalid.
  void validate(const IntentConfig& intent = {}) const;
};

struct AgentTruth {
  std::string track_id;   // id of the unfragmented track
  std::string object_id;  // key in the sample's Pedestrians / Cyclists map
  ObjectClass object_class{ObjectClass::person};
  IntentLabel label;
  RelativePosition position{RelativePosition::front};
  /// Every window's analytic displacement sits at zero or at least 1.5x the
  /// applicable deadband, so small perturbations cannot flip the label.
  bool clear_of_deadbands{true};
};

struct SynthOutput {
  std::vector<Track> tracks;
  FlowSequence flows;
  std::vector<AgentTruth> truth;
  /// Noise-free boxes at the final frame, intents empty.
  SceneAnnotation sample;
  /// Pairs (first fragment id, second fragment id) when fragmented.
  std::vector<std::pair<std::string, std::string>> true_links;
};

/// Deterministic in the scenario (including its seed). Image motion is road
/// velocity plus camera velocity, boxes scale about their centers and
/// observed centers get Gaussian noise. An agent's track ends when its box
/// leaves the frame; leaving before the shortest intent window is an error.
SynthOutput generate(const SynthScenario& scenario, const IntentConfig& intent = {});

/// Splits a track at `split_frame`, dropping `gap` frames from the split on.
/// Throws InvalidSplit unless both sides keep at least two observations.
std::pair<Track, Track> fragment(const Track& track, int split_frame, int gap);

/// Analytic intent of an agent over `last_frame + 1` noise-free frames.
std::pair<IntentLabel, bool> analytic_intent(const SynthAgent& agent, int last_frame,
                                             const IntentConfig& intent = {});

struct ScenarioFamily {
  FrameSize frame{1928, 1280};
  int n_frames{20};
  int min_agents{1};
  int max_agents{3};
  double max_camera_speed{4.0};
  double noise_sigma{0.0};
  bool allow_cyclists{true};
  std::optional<int> max_gap;  // fragment every agent with gap in [1, max_gap]
};

/// Random scenario whose agents sit in separate image rows and whose
/// velocities are clear of the intent deadbands.
SynthScenario random_scenario(std::uint64_t seed, const ScenarioFamily& family = {},
                              const IntentConfig& intent = {});

/// Textured frame pair where the second frame is the first shifted by
/// (dx, dy); uncovered pixels get fresh texture.
std::pair<GrayImage, GrayImage> translated_frame_pair(std::uint64_t seed, int width, int height, int dx,
                                                      int dy);

}  // namespace vruik
