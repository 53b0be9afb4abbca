// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"
#include "vruik/core.hpp"
#include "vruik/datasetio.hpp"
#include "vruik/error.hpp"
#include "vruik/formats.hpp"
#include "vruik/matching.hpp"
#include "vruik/metrics.hpp"
#include "vruik/pipeline.hpp"
#include "vruik/synth.hpp"
#include "vruik/tracklink.hpp"

using namespace vruik;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass{false};
  std::string detail;
};

int failures = 0;

void run(int number, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", number, title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<CostMatrix> random_matrices() {
  std::mt19937_64 rng(2024);
  std::vector<CostMatrix> out;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 6, m = 1 + rng() % 6;
    out.push_back(oracle::random_cost_matrix(rng, n, m, i % 2 == 0));
  }
  return out;
}

double max_cost_for(std::size_t i) { return i % 2 == 0 ? 11.0 / 16.0 : 0.7; }

Outcome assignment_optimality() {
  const auto matrices = random_matrices();
  const auto start = Clock::now();
  int mismatches = 0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const auto got = hungarian_assign(matrices[i], max_cost_for(i));
    const auto want = oracle::brute_force_assignment(matrices[i], max_cost_for(i));
    if (got.pairs != want.pairs || got.total_cost != want.total_cost) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 10.0,
          fmt("%d/1000 mismatches vs brute force, %.2f s", mismatches, elapsed)};
}

Outcome greedy_dominance() {
  const auto matrices = random_matrices();
  int violations = 0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const double h = hungarian_assign(matrices[i], max_cost_for(i)).total_cost;
    const double g = greedy_assign(matrices[i], max_cost_for(i)).total_cost;
    if (h > g) ++violations;
  }
  return {violations == 0, fmt("%d/1000 violations", violations)};
}

Outcome iou_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> pos(0, 40), size(1, 64);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int ax = pos(rng), ay = pos(rng), aw = size(rng), ah = size(rng);
    const int bx = pos(rng), by = pos(rng), bw = size(rng), bh = size(rng);
    const double want = oracle::pixel_iou(ax, ay, ax + aw, ay + ah, bx, by, bx + bw, by + bh);
    const double got = iou({double(ax), double(ay), double(ax + aw), double(ay + ah)},
                           {double(bx), double(by), double(bx + bw), double(by + bh)});
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= 1e-6, fmt("500 pairs, max |error| %.3g", worst)};
}

Outcome link_score_fidelity() {
  const LinkConfig cfg;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 800.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> gap(1, 40);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double d = dist(rng), alpha = unit(rng);
    const int dt = gap(rng);
    const auto got = link_score({{10.0, 20.0}, alpha}, {10.0 + d, 20.0}, dt, cfg);
    const auto [s, s_hat] = oracle::link_scores(d, dt, alpha, cfg.w_s, cfg.w_t, cfg.d_base, cfg.d_per_frame, cfg.t_max);
    worst = std::max({worst, std::abs(got.score - s), std::abs(got.adjusted_score - s_hat)});
  }

  // One candidate scoring 0.25 at each gap: linked at three frames, not at four.
  LinkConfig weights;
  weights.w_s = 0.9;
  weights.w_t = 0.1;
  auto links_at = [&](int dt) {
    const double temporal = weights.w_t * (1.0 - double(dt) / weights.t_max);
    const double d = weights.d_max(dt) * (1.0 - (0.25 - temporal) / weights.w_s);
    Track a{"a", ObjectClass::person, {}}, b{"b", ObjectClass::person, {}};
    for (int f = 0; f < 5; ++f) a.observations.push_back({f, {90, 80, 110, 120}, 1.0});
    for (int f = 4 + dt; f < 9 + dt; ++f) b.observations.push_back({f, {90 + d, 80, 110 + d, 120}, 1.0});
    return link_tracks_with_report({a, b}, weights).accepted.size() == 1;
  };
  const bool switch_ok = cfg.threshold(3) == 0.2 && cfg.threshold(4) == 0.3 && links_at(3) && !links_at(4);
  return {worst <= 1e-12 && switch_ok,
          fmt("100 tuples, max |error| %.3g; threshold switch at 3/4 frames %s", worst, switch_ok ? "ok" : "wrong")};
}

Outcome relinking() {
  const auto start = Clock::now();
  std::size_t true_positive = 0, found = 0, expected = 0;
  ScenarioFamily family;
  family.max_gap = 3;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto out = generate(random_scenario(seed, family));
    const std::set<std::pair<std::string, std::string>> truth(out.true_links.begin(), out.true_links.end());
    const auto report = link_tracks_with_report(out.tracks);
    for (const auto& c : report.accepted) true_positive += truth.count({c.from_track, c.to_track});
    found += report.accepted.size();
    expected += truth.size();
  }
  const double elapsed = seconds_since(start);
  const double precision = found ? double(true_positive) / found : 1.0;
  const double recall = double(true_positive) / expected;
  return {precision >= 0.99 && recall >= 0.99 && elapsed < 30.0,
          fmt("500 scenes, %zu links, precision %.4f, recall %.4f, %.2f s", expected, precision, recall, elapsed)};
}

Outcome egomotion_recovery() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> shift(-12, 12);
  const FrameSize frame{192, 160};
  int ok = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int dx = shift(rng), dy = shift(rng);
    const auto [a, b] = translated_frame_pair(1000 + i, frame.width, frame.height, dx, dy);
    const auto flow = estimate_flow_block_matching(a, b);
    const auto region = adjacent_region({80, 56, 112, 104}, frame, 0.5);
    const auto cam = camera_displacement(flow, region, FlowAggregator::median);
    const double err = std::max(std::abs(cam.dx - dx), std::abs(cam.dy - dy));
    worst = std::max(worst, err);
    ok += err <= 0.5;
  }
  return {ok == 100, fmt("%d/100 within 0.5 px, max error %.2f px", ok, worst)};
}

struct Agreement {
  std::size_t lateral{0}, vertical{0}, combined{0}, total{0};
};

Agreement intent_agreement(double noise_sigma, int scenes) {
  ScenarioFamily family;
  family.noise_sigma = noise_sigma;
  Agreement a;
  for (int seed = 0; seed < scenes; ++seed) {
    const auto synth = generate(random_scenario(std::uint64_t(seed), family));
    const auto out = annotate_sample(synth.sample, synth.tracks, synth.flows);
    for (const auto& truth : synth.truth) {
      const auto& o = truth.object_class == ObjectClass::person ? out.sample.pedestrians.at(truth.object_id)
                                                                : out.sample.cyclists.at(truth.object_id);
      ++a.total;
      if (!o.intent) continue;
      a.lateral += o.intent->lateral == truth.label.lateral;
      a.vertical += o.intent->vertical == truth.label.vertical;
      a.combined += *o.intent == truth.label;
    }
  }
  return a;
}

Outcome intent_oracle() {
  const auto start = Clock::now();
  const auto clean = intent_agreement(0.0, 200);
  const auto noisy = intent_agreement(1.0, 200);
  const double elapsed = seconds_since(start);
  const bool clean_ok = clean.lateral == clean.total && clean.vertical == clean.total && clean.combined == clean.total;
  const double noisy_rate = double(noisy.combined) / noisy.total;
  return {clean_ok && noisy_rate >= 0.95 && elapsed < 60.0,
          fmt("noiseless %zu/%zu lateral, %zu/%zu vertical, %zu/%zu combined; sigma 1: %.4f combined; %.2f s",
              clean.lateral, clean.total, clean.vertical, clean.total, clean.combined, clean.total, noisy_rate,
              elapsed)};
}

Outcome label_invariance() {
  ScenarioFamily family;
  family.max_camera_speed = 0.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> speed(-10.0, 10.0);
  int changed = 0, compared = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto scenario = random_scenario(seed, family);
    const auto base = generate(scenario);
    const auto base_out = annotate_sample(base.sample, base.tracks, base.flows).sample;
    const std::vector<Point2> cameras{{10, 0}, {-10, 0}, {0, 10}, {0, -10}, {speed(rng), speed(rng)}};
    for (const Point2 cam : cameras) {
      scenario.camera_velocity = cam;
      const auto moved = generate(scenario);
      const auto out = annotate_sample(moved.sample, moved.tracks, moved.flows).sample;
      for (const auto& truth : base.truth) {
        const auto& pick = [&](const SceneAnnotation& s) -> const ObjectAnnotation& {
          return truth.object_class == ObjectClass::person ? s.pedestrians.at(truth.object_id)
                                                           : s.cyclists.at(truth.object_id);
        };
        ++compared;
        changed += pick(out).intent != pick(base_out).intent;
      }
    }
  }
  return {changed == 0, fmt("%d of %d labels changed under camera motion up to 10 px/frame", changed, compared)};
}

Outcome metric_formulas() {
  const auto risk = risk_metrics({90, 5, 5, 10});
  const bool risk_ok = risk.balanced_accuracy == 0.7 && risk.f1 == 0.9;

  std::mt19937_64 rng(31);
  int bound_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<IntentPair> pairs;
    const int n = 1 + int(rng() % 25);
    for (int i = 0; i < n; ++i) {
      std::optional<IntentLabel> pred;
      if (rng() % 6) pred = IntentLabel{LateralIntent(rng() % 3), VerticalIntent(rng() % 3)};
      pairs.push_back({pred, IntentLabel{LateralIntent(rng() % 3), VerticalIntent(rng() % 3)}});
    }
    const auto a = intent_accuracy(pairs);
    bound_violations += a.combined > std::min(a.lip, a.vip);
  }

  const BoundingBox A{0, 0, 10, 10}, B{100, 100, 130, 160}, C{200, 0, 240, 40}, D{300, 300, 320, 340};
  struct Case {
    DetectionEvalInput input;
    double expected;
  };
  const std::vector<Case> cases{
      {{{A}, {A}}, 1.0},
      {{{A, B}, {}}, 0.0},
      {{{}, {A}}, 1.0},
      {{{A}, {{0, 0, 10, 20}}}, 1.0},        // IoU exactly 0.5
      {{{A}, {{0, 0, 10, 21}}}, 0.0},        // just below
      {{{A, B}, {A, {0, 0, 10, 11}}}, 0.5},  // two predictions on one object
      {{{A, B, C}, {C, B, A}}, 1.0},
      {{{A}, {A, D}}, 1.0},
      {{{A, D}, {{1, 0, 11, 10}}}, 0.5},     // IoU 9/11
      {{{A, B, C, D}, {A, B, {200, 0, 219, 40}}}, 0.5},  // third at IoU 0.475
  };
  int od_wrong = 0;
  for (const auto& c : cases) od_wrong += od_accuracy(c.input).accuracy != c.expected;
  return {risk_ok && bound_violations == 0 && od_wrong == 0,
          fmt("BA %.17g F1 %.17g; %d/1000 bound violations; %d/10 OD fixtures wrong", risk.balanced_accuracy, risk.f1,
              bound_violations, od_wrong)};
}

Outcome dataset_io() {
  const std::string path = VRUIK_FIXTURE_DIR "/drama_x_20.json";
  const std::string original = read_text_file(path);
  const auto loaded = parse_dataset(original).samples;
  const std::string written = serialize_dataset(loaded);
  const bool identity = parse_dataset(written).samples == loaded;
  const bool bytes = written == original && serialize_dataset(parse_dataset(written).samples) == written;
  const bool has_example = loaded.count("sample_n") == 1;
  const auto st = dataset_stats(loaded);
  DatasetStats want;
  want.samples = 20;
  want.pedestrians = 24;
  want.cyclists = 10;
  want.risk_yes = 15;
  want.risk_no = 5;
  want.intent_empty = 9;
  want.lateral = {{LateralIntent::stationary, 12}, {LateralIntent::goes_to_the_left, 6}, {LateralIntent::goes_to_the_right, 7}};
  want.vertical = {{VerticalIntent::stationary, 11},
                   {VerticalIntent::moves_towards_ego_vehicle, 7},
                   {VerticalIntent::moves_away_from_ego_vehicle, 7}};
  want.position = {{RelativePosition::left, 7}, {RelativePosition::front, 7}, {RelativePosition::right, 11}};
  const bool stats_ok = st == want;
  return {identity && bytes && has_example && stats_ok,
          fmt("%zu samples; load/write identity %s; byte-stable %s; stats %s", loaded.size(), identity ? "yes" : "no",
              bytes ? "yes" : "no", stats_ok ? "match" : "differ")};
}

Outcome mode_ordering() {
  ScenarioFamily family;
  family.noise_sigma = 1.0;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shift(-0.6, 0.6);
  Dataset all_gt, all_pred;
  int evaluations = 0, violations = 0;
  auto check = [&](const Dataset& gt, const Dataset& pred) {
    const auto full = run_evaluation(gt, pred, EvaluationMode::full);
    const auto boxed = run_evaluation(gt, pred, EvaluationMode::gt_boxes);
    ++evaluations;
    violations += *full.combined > *boxed.combined;
  };
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto synth = generate(random_scenario(seed, family));
    SceneAnnotation gt = synth.sample;
    for (const auto& t : synth.truth) {
      auto& o = t.object_class == ObjectClass::person ? gt.pedestrians.at(t.object_id) : gt.cyclists.at(t.object_id);
      o.intent = t.label;
      o.position = t.position;
    }
    SceneAnnotation pred = annotate_sample(synth.sample, synth.tracks, synth.flows).sample;
    // Detector error: boxes drift by up to 60% of their size.
    auto jitter = [&](std::map<std::string, ObjectAnnotation>& objects) {
      for (auto& [id, o] : objects) {
        const double w = o.box.width(), h = o.box.height();
        const double sx = shift(rng) * w, sy = shift(rng) * h;
        o.box = {o.box.x1 + sx, o.box.y1 + sy, o.box.x2 + sx, o.box.y2 + sy};
      }
    };
    jitter(pred.pedestrians);
    jitter(pred.cyclists);
    const std::string id = "synth_" + std::to_string(seed);
    all_gt.emplace(id, gt);
    all_pred.emplace(id, pred);
    check({{id, gt}}, {{id, pred}});
  }
  check(all_gt, all_pred);
  const auto full = run_evaluation(all_gt, all_pred, EvaluationMode::full);
  const auto boxed = run_evaluation(all_gt, all_pred, EvaluationMode::gt_boxes);
  return {violations == 0, fmt("%d/%d evaluations violate full <= gt_boxes (pooled %.4f vs %.4f)", violations,
                               evaluations, *full.combined, *boxed.combined)};
}

}  // namespace

int main() {
  run(1, "assignment optimality", assignment_optimality);
  run(2, "greedy dominance", greedy_dominance);
  run(3, "IoU oracle", iou_oracle);
  run(4, "link-score fidelity", link_score_fidelity);
  run(5, "track relinking", relinking);
  run(6, "ego-motion recovery", egomotion_recovery);
  run(7, "intent oracle", intent_oracle);
  run(8, "ego-motion label invariance", label_invariance);
  run(9, "metric formulas", metric_formulas);
  run(10, "dataset I/O", dataset_io);
  run(11, "mode ordering", mode_ordering);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
