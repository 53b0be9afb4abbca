#include "vruik/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vruik/error.hpp"

namespace vruik {

namespace {

BoundingBox box_at(const SynthAgent& agent, Point2 camera, int t, Point2 noise = {}) {
  const Point2 c0 = center(agent.initial_box);
  const double grow = std::pow(1.0 + agent.scale_rate, t);
  const double w = agent.initial_box.width() * grow;
  const double h = agent.initial_box.height() * grow;
  const double cx = c0.x + (agent.road_velocity.x + camera.x) * t + noise.x;
  const double cy = c0.y + (agent.road_velocity.y + camera.y) * t + noise.y;
  return {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
}

bool intersects_frame(const BoundingBox& b, FrameSize frame) {
  return b.x2 > 0.0 && b.y2 > 0.0 && b.x1 < frame.width && b.y1 < frame.height;
}

template <typename Label>
Label vote(const std::vector<Label>& votes) {
  std::map<Label, int> counts;
  for (Label v : votes) ++counts[v];
  int best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);
  for (auto it = votes.rbegin(); it != votes.rend(); ++it)
    if (counts[*it] == best) return *it;
  return Label{};
}

}  // namespace

void SynthScenario::validate(const IntentConfig& intent) const {
  if (!frame.valid()) throw ScenarioInvalid("frame size must be positive");
  if (agents.empty()) throw ScenarioInvalid("scenario needs at least one agent");
  const int longest = *std::max_element(intent.windows.begin(), intent.windows.end());
  if (n_frames < longest) throw ScenarioInvalid("n_frames is shorter than the longest intent window");
  if (fragmentation && fragmentation->gap < 1) throw ScenarioInvalid("fragmentation gap must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ScenarioInvalid("noise_sigma must be >= 0");
  for (const auto& a : agents) {
    if (!a.initial_box.valid()) throw ScenarioInvalid("agent has an invalid initial box");
    if (!(a.scale_rate > -1.0)) throw ScenarioInvalid("scale_rate must exceed -1");
  }
}

std::pair<IntentLabel, bool> analytic_intent(const SynthAgent& agent, int last_frame,
                                             const IntentConfig& intent) {
  if (last_frame + 1 < intent.min_track_len) return {IntentLabel{}, true};
  std::vector<int> windows = intent.windows;
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());

  const double end_width = agent.initial_box.width() * std::pow(1.0 + agent.scale_rate, last_frame);
  const double lateral_band =
      std::max(intent.lateral_deadband_px, intent.lateral_deadband_frac_of_width * end_width);
  bool clear = true;
  std::vector<LateralIntent> lateral;
  std::vector<VerticalIntent> vertical;
  for (int w : windows) {
    const int span = std::min(w, last_frame);
    if (span < 1) continue;
    const double dx = agent.road_velocity.x * span;
    const double dy = agent.road_velocity.y * span;
    const double ratio = std::pow(1.0 + agent.scale_rate, span);
    lateral.push_back(classify_lateral(dx, end_width, intent));
    vertical.push_back(classify_vertical(dy, ratio, intent));

    if (dx != 0.0 && std::abs(dx) < 1.5 * lateral_band) clear = false;
    if (agent.scale_rate != 0.0) {
      if (std::abs(ratio - 1.0) < 1.5 * intent.vertical_scale_ratio_eps) clear = false;
    } else if (dy != 0.0 && std::abs(dy) < 1.5 * intent.vertical_deadband_px) {
      clear = false;
    }
  }
  if (lateral.empty()) return {IntentLabel{}, clear};
  return {IntentLabel{vote(lateral), vote(vertical)}, clear};
}

SynthOutput generate(const SynthScenario& scenario, const IntentConfig& intent) {
  scenario.validate(intent);
  const int shortest = *std::min_element(intent.windows.begin(), intent.windows.end());
  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SynthOutput out;
  out.sample.image_path = "synth/" + std::to_string(scenario.seed) + ".png";
  out.sample.video_path = "synth/" + std::to_string(scenario.seed) + ".mp4";
  out.sample.risk = Risk::yes;
  out.sample.suggested_action = "slow down and watch the road users";

  int next_pedestrian = 1;
  int next_cyclist = 1;
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    const auto& agent = scenario.agents[i];
    Track track;
    track.id = "agent" + std::to_string(i);
    track.object_class = agent.object_class;
    for (int t = 0; t < scenario.n_frames; ++t) {
      const Point2 jitter{scenario.noise_sigma * noise(rng), scenario.noise_sigma * noise(rng)};
      const BoundingBox truth_box = box_at(agent, scenario.camera_velocity, t);
      if (!intersects_frame(truth_box, scenario.frame)) break;
      track.observations.push_back({t, box_at(agent, scenario.camera_velocity, t, jitter), 1.0});
    }
    if (track.observations.empty() || track.last_frame() < shortest) {
      throw ScenarioInvalid(track.id + " leaves the frame before the shortest intent window");
    }
    const int last = track.last_frame();

    AgentTruth truth;
    truth.track_id = track.id;
    truth.object_class = agent.object_class;
    std::tie(truth.label, truth.clear_of_deadbands) = analytic_intent(agent, last, intent);
    const BoundingBox final_box = box_at(agent, scenario.camera_velocity, last);
    truth.position = classify_position(center(final_box).x, scenario.frame, intent);

    ObjectAnnotation annotation;
    annotation.box = final_box;
    if (agent.object_class == ObjectClass::person) {
      truth.object_id = std::to_string(next_pedestrian++);
      out.sample.pedestrians.emplace(truth.object_id, annotation);
    } else {
      truth.object_id = std::to_string(next_cyclist++);
      out.sample.cyclists.emplace(truth.object_id, annotation);
    }
    out.truth.push_back(truth);

    if (scenario.fragmentation) {
      auto [head, tail] = fragment(track, scenario.fragmentation->split_frame, scenario.fragmentation->gap);
      out.true_links.emplace_back(head.id, tail.id);
      out.tracks.push_back(std::move(head));
      out.tracks.push_back(std::move(tail));
    } else {
      out.tracks.push_back(std::move(track));
    }
  }

  auto field = std::make_shared<const FlowField>(
      scenario.frame.width, scenario.frame.height,
      FlowVector{float(scenario.camera_velocity.x), float(scenario.camera_velocity.y)});
  for (int t = 0; t + 1 < scenario.n_frames; ++t) out.flows.emplace(t, field);
  return out;
}

std::pair<Track, Track> fragment(const Track& track, int split_frame, int gap) {
  if (gap < 0) throw InvalidSplit("gap must be >= 0");
  Track head{track.id + "-a", track.object_class, {}};
  Track tail{track.id + "-b", track.object_class, {}};
  for (const auto& o : track.observations) {
    if (o.frame < split_frame) {
      head.observations.push_back(o);
    } else if (o.frame >= split_frame + gap) {
      tail.observations.push_back(o);
    }
  }
  if (head.observations.size() < 2 || tail.observations.size() < 2)
    throw InvalidSplit("split at frame " + std::to_string(split_frame) + " with gap " + std::to_string(gap) +
                       " leaves fewer than two observations on one side");
  return {std::move(head), std::move(tail)};
}

SynthScenario random_scenario(std::uint64_t seed, const ScenarioFamily& family, const IntentConfig& intent) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  SynthScenario s;
  s.seed = seed;
  s.frame = family.frame;
  s.n_frames = family.n_frames;
  s.noise_sigma = family.noise_sigma;
  s.camera_velocity = {uniform(-family.max_camera_speed, family.max_camera_speed),
                       uniform(-family.max_camera_speed, family.max_camera_speed)};

  std::vector<double> rows{0.2, 0.5, 0.8};
  std::shuffle(rows.begin(), rows.end(), rng);
  const int n_agents = pick(family.min_agents, std::min<int>(family.max_agents, int(rows.size())));
  const double W = family.frame.width;
  const double H = family.frame.height;

  for (int i = 0; i < n_agents; ++i) {
    SynthAgent a;
    a.object_class = family.allow_cyclists && uniform(0.0, 1.0) < 0.25 ? ObjectClass::cyclist : ObjectClass::person;
    const double h = uniform(0.0625, 0.125) * H;
    const double w = h * (a.object_class == ObjectClass::person ? uniform(0.35, 0.5) : uniform(0.6, 0.9));
    const double cx = uniform(0.4, 0.6) * W;
    const double cy = rows[std::size_t(i)] * H + uniform(-0.015, 0.015) * H;
    a.initial_box = {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};

    for (int attempt = 0; attempt < 1000; ++attempt) {
      const int lateral = pick(0, 2);
      a.road_velocity.x = lateral == 0 ? 0.0 : (lateral == 1 ? -1.0 : 1.0) * uniform(2.5, 5.0);
      const int vertical = pick(0, 2);
      const double sign = vertical == 1 ? 1.0 : -1.0;
      if (vertical == 0) {
        a.scale_rate = 0.0;
        a.road_velocity.y = 0.0;
      } else if (uniform(0.0, 1.0) < 0.5) {
        a.scale_rate = sign * uniform(0.008, 0.02);
        a.road_velocity.y = sign * uniform(0.0, 1.5);
      } else {
        a.scale_rate = 0.0;
        a.road_velocity.y = sign * uniform(1.0, 2.0);
      }
      if (analytic_intent(a, s.n_frames - 1, intent).second) break;
    }
    s.agents.push_back(a);
  }

  if (family.max_gap) {
    const int gap = pick(1, *family.max_gap);
    s.fragmentation = Fragmentation{pick(2, s.n_frames - 2 - gap), gap};
  }
  return s;
}

std::pair<GrayImage, GrayImage> translated_frame_pair(std::uint64_t seed, int width, int height, int dx,
                                                      int dy) {
  if (width <= 0 || height <= 0) throw InvalidInput("frame size must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> texture(0, 255);
  GrayImage a{width, height, std::vector<std::uint8_t>(std::size_t(width) * height)};
  for (auto& p : a.pixels) p = static_cast<std::uint8_t>(texture(rng));
  GrayImage b{width, height, std::vector<std::uint8_t>(std::size_t(width) * height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int sx = x - dx;
      const int sy = y - dy;
      const bool inside = sx >= 0 && sx < width && sy >= 0 && sy < height;
      b.pixels[std::size_t(y) * width + x] =
          inside ? a.at(sx, sy) : static_cast<std::uint8_t>(texture(rng));
    }
  }
  return {std::move(a), std::move(b)};
}

}  // namespace vruik
