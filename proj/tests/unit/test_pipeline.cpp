#include <atomic>

#include "doctest.h"
#include "vruik/error.hpp"
#include "vruik/pipeline.hpp"

using namespace vruik;

namespace {

std::vector<ObjectAnnotation> objects_of(const SceneAnnotation& s) {
  std::vector<ObjectAnnotation> out;
  for (const auto& [id, o] : s.pedestrians) out.push_back(o);
  for (const auto& [id, o] : s.cyclists) out.push_back(o);
  return out;
}

const ObjectAnnotation& object_for(const SceneAnnotation& s, const AgentTruth& truth) {
  return truth.object_class == ObjectClass::person ? s.pedestrians.at(truth.object_id)
                                                   : s.cyclists.at(truth.object_id);
}

Dataset fixture() { return load_dataset(VRUIK_FIXTURE_DIR "/drama_x_20.json").samples; }

}  // namespace

TEST_CASE("synth scenes end to end") {
  ScenarioFamily family;
  family.max_gap = 3;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto scenario = random_scenario(seed, family);
    const auto synth = generate(scenario);
    const auto out = annotate_sample(synth.sample, synth.tracks, synth.flows);
    for (const auto& truth : synth.truth) {
      const auto& o = object_for(out.sample, truth);
      REQUIRE(o.intent);
      CHECK(*o.intent == truth.label);
      CHECK(*o.position == truth.position);
    }
  }
}

TEST_CASE("annotation leaves boxes alone and validates") {
  ScenarioFamily family;
  family.noise_sigma = 1.0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto synth = generate(random_scenario(seed, family));
    const auto out = annotate_sample(synth.sample, synth.tracks, synth.flows);
    const auto before = objects_of(synth.sample);
    const auto after = objects_of(out.sample);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].box == after[i].box);
    const Dataset d{{"s", out.sample}};
    const auto reloaded = parse_dataset(serialize_dataset(d));
    CHECK(reloaded.flags.empty());
  }
}

TEST_CASE("prefilled, empty and trackless samples") {
  const auto synth = generate(random_scenario(5));
  auto filled = annotate_sample(synth.sample, synth.tracks, synth.flows).sample;

  SUBCASE("skip unless forced") {
    auto tampered = filled;
    for (auto& [id, o] : tampered.pedestrians) o.intent = IntentLabel{LateralIntent::goes_to_the_left, VerticalIntent::stationary};
    for (auto& [id, o] : tampered.cyclists) o.intent = IntentLabel{LateralIntent::goes_to_the_left, VerticalIntent::stationary};
    const auto skipped = annotate_sample(tampered, synth.tracks, synth.flows);
    CHECK(skipped.sample == tampered);
    REQUIRE(skipped.flags.size() == 1);
    CHECK(skipped.flags[0].rfind("skipped", 0) == 0);
    const auto forced = annotate_sample(tampered, synth.tracks, synth.flows, {}, true);
    CHECK(forced.sample == filled);
  }
  SUBCASE("no objects") {
    SceneAnnotation empty = synth.sample;
    empty.pedestrians.clear();
    empty.cyclists.clear();
    const auto out = annotate_sample(empty, synth.tracks, synth.flows);
    CHECK(out.sample == empty);
    CHECK(out.flags.empty());
  }
  SUBCASE("no tracks") {
    const auto out = annotate_sample(synth.sample, {}, synth.flows);
    REQUIRE(!out.flags.empty());
    CHECK(out.flags[0].rfind("degraded-input", 0) == 0);
    for (const auto& o : objects_of(out.sample)) {
      CHECK(*o.intent == IntentLabel{});
      CHECK(o.position.has_value());
    }
  }
  SUBCASE("unmatched objects") {
    auto extra = synth.sample;
    extra.pedestrians.emplace("99", ObjectAnnotation{{10, 10, 40, 90}, {}, {}, ""});
    const auto out = annotate_sample(extra, synth.tracks, synth.flows);
    CHECK(*out.sample.pedestrians.at("99").intent == IntentLabel{});
    CHECK(*out.sample.pedestrians.at("99").position == RelativePosition::left);
    CHECK(std::find(out.flags.begin(), out.flags.end(), "unmatched: Pedestrians/99") != out.flags.end());
  }
}

TEST_CASE("duplicate annotation boxes share a track") {
  SynthScenario s;
  s.agents.push_back({ObjectClass::person, {900, 500, 960, 650}, {4, 0}, 0.0});
  auto synth = generate(s);
  auto box = synth.sample.pedestrians.at("1").box;
  box.x1 += 0.5;
  synth.sample.pedestrians.emplace("2", ObjectAnnotation{box, {}, {}, ""});
  const auto out = annotate_sample(synth.sample, synth.tracks, synth.flows);
  CHECK(*out.sample.pedestrians.at("2").intent == synth.truth[0].label);
  CHECK(*out.sample.pedestrians.at("1").intent == synth.truth[0].label);
}

TEST_CASE("annotate_dataset") {
  Dataset samples;
  std::map<std::string, SynthOutput> synths;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::string id = "synth_" + std::to_string(seed);
    synths.emplace(id, generate(random_scenario(seed)));
    samples.emplace(id, synths.at(id).sample);
  }
  samples.emplace("broken", synths.begin()->second.sample);
  std::atomic<int> calls{0};
  auto loader = [&](const std::string& id) {
    ++calls;
    if (id == "broken") throw IoError("no inputs for broken");
    return SampleInputs{synths.at(id).tracks, synths.at(id).flows};
  };
  const auto serial = annotate_dataset(samples, loader, {}, false, 1);
  const auto parallel = annotate_dataset(samples, loader, {}, false, 4);
  CHECK(calls == 26);
  CHECK(serial.samples == parallel.samples);
  CHECK(serial.flags == parallel.flags);
  CHECK(serial.samples.at("broken") == samples.at("broken"));
  REQUIRE(serial.flags.count("broken"));
  CHECK(serial.flags.at("broken")[0].rfind("error:", 0) == 0);
  for (const auto& [id, synth] : synths) {
    CHECK(serial.samples.at(id) == annotate_sample(synth.sample, synth.tracks, synth.flows).sample);
  }
}

TEST_CASE("evaluation identities") {
  const auto gt = fixture();
  SUBCASE("perfect predictions") {
    const auto r = run_evaluation(gt, gt, EvaluationMode::full);
    CHECK(r.od == 1.0);
    CHECK(r.lip == 1.0);
    CHECK(r.vip == 1.0);
    CHECK(r.combined == 1.0);
    CHECK(r.ba == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.as == 1.0);
    CHECK(r.n_samples == 20);
  }
  SUBCASE("inverted risk") {
    auto pred = gt;
    for (auto& [id, s] : pred) s.risk = s.risk == Risk::yes ? Risk::no : Risk::yes;
    const auto r = run_evaluation(gt, pred, EvaluationMode::full);
    // every prediction wrong: both class recalls are zero and TP = 0
    CHECK(r.ba == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.combined == 1.0);
  }
  SUBCASE("gt boxes bypass detection") {
    auto pred = gt;
    for (auto& [id, s] : pred) {
      for (auto& [oid, o] : s.pedestrians) o.box = {0, 0, 1, 1};
      for (auto& [oid, o] : s.cyclists) o.box = {0, 0, 1, 1};
    }
    const auto boxed = run_evaluation(gt, pred, EvaluationMode::gt_boxes);
    CHECK(boxed.combined == 1.0);
    const auto full = run_evaluation(gt, pred, EvaluationMode::full);
    CHECK(*full.od < 1.0);
    CHECK(*full.combined <= *boxed.combined);
  }
  SUBCASE("disjoint ids") {
    Dataset other;
    other.emplace("elsewhere", gt.begin()->second);
    CHECK_THROWS_AS(run_evaluation(gt, other, EvaluationMode::full), EvaluationImpossible);
  }
  SUBCASE("partial overlap is flagged") {
    Dataset pred;
    pred.emplace(*gt.begin());
    pred.emplace("extra", gt.begin()->second);
    const auto r = run_evaluation(gt, pred, EvaluationMode::full);
    CHECK(r.n_samples == 1);
    CHECK(r.flags.size() >= 2);
  }
}

TEST_CASE("report JSON nulls undefined metrics") {
  EvaluationReport r;
  r.od = 0.5;
  r.n_samples = 3;
  const auto text = report_to_json(r);
  CHECK(text.find("\"od\": 0.5") != std::string::npos);
  CHECK(text.find("\"lip\": null") != std::string::npos);
  CHECK(text.find("\"ba\": null") != std::string::npos);
}

TEST_CASE("block-matched flows") {
  std::map<int, GrayImage> frames;
  auto [a, b] = translated_frame_pair(4, 96, 64, 3, 1);
  frames.emplace(0, a);
  frames.emplace(1, b);
  frames.emplace(5, a);
  PipelineConfig config;
  config.frame = {96, 64};
  const auto flows = flows_from_frames(frames, config);
  REQUIRE(flows.size() == 1);
  CHECK(flows.at(0)->at(48, 32) == FlowVector{3.0f, 1.0f});
}
