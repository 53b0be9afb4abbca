#include "vruik/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "json.hpp"
#include "vruik/error.hpp"
#include "vruik/matching.hpp"

namespace vruik {

void PipelineConfig::validate() const {
  curation.validate();
  link.validate();
  intent.validate();
  if (!(theta_iou >= 0.0 && theta_iou <= 1.0)) throw InvalidInput("theta_iou must lie in [0, 1]");
  if (!(dedup_iou > 0.0 && dedup_iou <= 1.0)) throw InvalidInput("dedup_iou must lie in (0, 1]");
  if (!(region_margin_frac > 0.0)) throw InvalidInput("region_margin_frac must be positive");
  if (block_size < 1 || search_radius < 0) throw InvalidInput("invalid block matching parameters");
  if (!frame.valid()) throw InvalidInput("frame size must be positive");
}

namespace {

struct ObjectRef {
  std::map<std::string, ObjectAnnotation>* objects;
  std::string id;
  std::string path;  // for flags, e.g. "Pedestrians/1"
  ObjectClass object_class;
};

std::vector<ObjectRef> object_refs(SceneAnnotation& sample) {
  std::vector<ObjectRef> refs;
  for (auto& [id, o] : sample.pedestrians) refs.push_back({&sample.pedestrians, id, "Pedestrians/" + id, ObjectClass::person});
  for (auto& [id, o] : sample.cyclists) refs.push_back({&sample.cyclists, id, "Cyclists/" + id, ObjectClass::cyclist});
  return refs;
}

// Box at frame t, interpolated linearly across gaps in the track.
BoundingBox box_at_frame(const Track& track, int t) {
  const auto& obs = track.observations;
  auto after = std::lower_bound(obs.begin(), obs.end(), t,
                                [](const Observation& o, int frame) { return o.frame < frame; });
  if (after == obs.end()) return obs.back().box;
  if (after->frame == t || after == obs.begin()) return after->box;
  const auto before = std::prev(after);
  const double w = double(t - before->frame) / double(after->frame - before->frame);
  auto mix = [w](double a, double b) { return a + (b - a) * w; };
  return {mix(before->box.x1, after->box.x1), mix(before->box.y1, after->box.y1),
          mix(before->box.x2, after->box.x2), mix(before->box.y2, after->box.y2)};
}

CameraTrack camera_along(const Track& track, const FlowSequence& flows, const PipelineConfig& config) {
  CameraTrack camera;
  for (int t = track.first_frame(); t < track.last_frame(); ++t) {
    auto it = flows.find(t);
    if (it == flows.end() || !it->second) continue;
    try {
      const auto region = adjacent_region(box_at_frame(track, t), config.frame, config.region_margin_frac);
      camera[t] = camera_displacement(*it->second, region, config.aggregator);
    } catch (const DegenerateRegion&) {
      // Left out; window_displacement treats the frame as zero motion.
    }
  }
  return camera;
}

}  // namespace

AnnotationOutcome annotate_sample(const SceneAnnotation& sample, const std::vector<Track>& tracks,
                                  const FlowSequence& flows, const PipelineConfig& config, bool force) {
  AnnotationOutcome out{sample, {}};
  if (!sample.has_objects()) return out;

  auto refs = object_refs(out.sample);
  const bool prefilled = std::any_of(refs.begin(), refs.end(), [](const ObjectRef& r) {
    const auto& o = r.objects->at(r.id);
    return o.intent.has_value() || o.position.has_value();
  });
  if (prefilled && !force) {
    out.flags.push_back("skipped: intents already present");
    return out;
  }

  auto fill_unmatched = [&](const ObjectRef& r) {
    auto& o = r.objects->at(r.id);
    o.intent = IntentLabel{};
    o.position = classify_position(center(o.box).x, config.frame, config.intent);
  };

  if (tracks.empty()) {
    out.flags.push_back("degraded-input: no tracks");
    for (const auto& r : refs) fill_unmatched(r);
    return out;
  }

  const auto linked = link_tracks(tracks, config.link);
  int key_frame = 0;
  if (config.key_frame) {
    key_frame = *config.key_frame;
  } else {
    for (const auto& t : linked) key_frame = std::max(key_frame, t.last_frame());
  }

  std::vector<ClassBox> annotations;
  for (const auto& r : refs) annotations.push_back({r.object_class, r.objects->at(r.id).box});
  // Duplicates of a kept annotation share its track; the matcher itself
  // only sees the kept ones.
  const auto kept = deduplicate_indices(annotations, config.dedup_iou);
  std::vector<ClassBox> kept_boxes;
  for (std::size_t k : kept) kept_boxes.push_back(annotations[k]);
  const auto match = match_tracks_to_annotations(linked, kept_boxes, key_frame, config.theta_iou,
                                                 config.dedup_iou);
  if (match.used_greedy_fallback) out.flags.push_back("greedy-fallback");

  std::vector<std::optional<std::size_t>> track_of(refs.size());
  for (auto [t, a] : match.assignment.pairs) track_of[kept[a]] = t;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (std::binary_search(kept.begin(), kept.end(), i)) continue;
    for (std::size_t k : kept) {
      if (annotations[k].object_class == annotations[i].object_class &&
          iou(annotations[k].box, annotations[i].box) > config.dedup_iou && track_of[k]) {
        track_of[i] = track_of[k];
        out.flags.push_back("duplicate: " + refs[i].path);
        break;
      }
    }
  }

  std::map<std::size_t, IntentResult> inferred;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    if (!track_of[i]) {
      out.flags.push_back("unmatched: " + r.path);
      fill_unmatched(r);
      continue;
    }
    const std::size_t t = *track_of[i];
    if (!inferred.count(t)) {
      inferred[t] = infer_intent(linked[t], camera_along(linked[t], flows, config), config.frame, config.intent);
    }
    const auto& result = inferred[t];
    if (result.missing_camera) out.flags.push_back("missing-camera: " + r.path);
    auto& o = r.objects->at(r.id);
    o.intent = result.label;
    o.position = result.position;
  }
  return out;
}

DatasetAnnotation annotate_dataset(const Dataset& samples, const SampleInputLoader& loader,
                                   const PipelineConfig& config, bool force, int jobs) {
  config.validate();
  std::vector<const std::pair<const std::string, SceneAnnotation>*> work;
  for (const auto& entry : samples) work.push_back(&entry);
  std::vector<AnnotationOutcome> results(work.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const auto& [id, sample] = *work[i];
      try {
        const auto inputs = loader(id);
        results[i] = annotate_sample(sample, inputs.tracks, inputs.flows, config, force);
      } catch (const Error& e) {
        results[i] = {sample, {std::string("error: ") + e.what()}};
      }
    }
  };
  const int n_threads = std::clamp<int>(jobs, 1, std::max<int>(1, int(work.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  DatasetAnnotation out;
  for (std::size_t i = 0; i < work.size(); ++i) {
    out.samples.emplace(work[i]->first, std::move(results[i].sample));
    if (!results[i].flags.empty()) out.flags.emplace(work[i]->first, std::move(results[i].flags));
  }
  return out;
}

namespace {

struct EvalAccumulator {
  std::size_t od_matched{0};
  std::size_t od_total{0};
  std::vector<IntentPair> intents;
  ConfusionCounts risk;
  std::vector<ActionPair> actions;
  std::size_t gt_objects_without_intent{0};
};

void accumulate_class(const std::map<std::string, ObjectAnnotation>& gt,
                      const std::map<std::string, ObjectAnnotation>& pred, EvaluationMode mode,
                      EvalAccumulator& acc) {
  DetectionEvalInput od;
  std::vector<const ObjectAnnotation*> gt_objs, pred_objs;
  for (const auto& [id, o] : gt) {
    od.ground_truth.push_back(o.box);
    gt_objs.push_back(&o);
  }
  for (const auto& [id, o] : pred) {
    od.predictions.push_back(o.box);
    pred_objs.push_back(&o);
  }
  const auto matches = od_matches(od);
  acc.od_matched += matches.size();
  acc.od_total += od.ground_truth.size();

  std::vector<const ObjectAnnotation*> partner(gt_objs.size(), nullptr);
  if (mode == EvaluationMode::full) {
    for (auto [g, p] : matches) partner[g] = pred_objs[p];
  } else {
    std::size_t g = 0;
    for (const auto& [id, o] : gt) {
      auto it = pred.find(id);
      if (it != pred.end()) partner[g] = &it->second;
      ++g;
    }
  }
  for (std::size_t g = 0; g < gt_objs.size(); ++g) {
    if (!gt_objs[g]->intent) {
      ++acc.gt_objects_without_intent;
      continue;
    }
    IntentPair pair;
    pair.truth = *gt_objs[g]->intent;
    if (partner[g]) pair.predicted = partner[g]->intent;
    acc.intents.push_back(pair);
  }
}

}  // namespace

EvaluationReport run_evaluation(const Dataset& gt, const Dataset& pred, EvaluationMode mode,
                                const SimilarityScorer& scorer) {
  EvaluationReport report;
  EvalAccumulator acc;
  std::size_t only_gt = 0;
  for (const auto& [id, g] : gt) {
    auto it = pred.find(id);
    if (it == pred.end()) {
      ++only_gt;
      continue;
    }
    const auto& p = it->second;
    ++report.n_samples;
    accumulate_class(g.pedestrians, p.pedestrians, mode, acc);
    accumulate_class(g.cyclists, p.cyclists, mode, acc);
    const bool truth = g.risk == Risk::yes;
    const bool guess = p.risk == Risk::yes;
    if (truth && guess) ++acc.risk.tp;
    if (!truth && guess) ++acc.risk.fp;
    if (!truth && !guess) ++acc.risk.tn;
    if (truth && !guess) ++acc.risk.fn;
    acc.actions.push_back({id, p.suggested_action, g.suggested_action});
  }
  if (report.n_samples == 0) throw EvaluationImpossible("ground truth and predictions share no sample id");
  const std::size_t only_pred = pred.size() - report.n_samples;
  if (only_gt) report.flags.push_back("samples-missing-from-predictions: " + std::to_string(only_gt));
  if (only_pred) report.flags.push_back("samples-missing-from-ground-truth: " + std::to_string(only_pred));
  if (mode == EvaluationMode::gt_boxes) report.flags.push_back("mode: gt_boxes");

  if (acc.od_total == 0) {
    report.od = 1.0;
    report.flags.push_back("od: empty ground truth");
  } else {
    report.od = double(acc.od_matched) / double(acc.od_total);
  }

  if (acc.gt_objects_without_intent)
    report.flags.push_back("gt-objects-without-intent: " + std::to_string(acc.gt_objects_without_intent));
  report.n_intent_pairs = acc.intents.size();
  if (acc.intents.empty()) {
    report.flags.push_back("intent: undefined (no ground-truth intents)");
  } else {
    const auto ip = intent_accuracy(acc.intents);
    report.lip = ip.lip;
    report.vip = ip.vip;
    report.combined = ip.combined;
  }

  try {
    report.ba = balanced_accuracy(acc.risk);
  } catch (const UndefinedMetric& e) {
    report.flags.push_back(std::string("undefined: ") + e.what());
  }
  try {
    report.f1 = positive_f1(acc.risk);
  } catch (const UndefinedMetric& e) {
    report.flags.push_back(std::string("undefined: ") + e.what());
  }
  report.as = action_similarity(acc.actions, scorer);
  return report;
}

EvaluationReport run_evaluation(const Dataset& gt, const Dataset& pred, EvaluationMode mode) {
  return run_evaluation(gt, pred, mode, TokenF1Scorer{});
}

std::string report_to_json(const EvaluationReport& report) {
  using ordered = nlohmann::ordered_json;
  auto value = [](const std::optional<double>& v) { return v ? ordered(*v) : ordered(nullptr); };
  ordered j = ordered::object();
  j["od"] = value(report.od);
  j["lip"] = value(report.lip);
  j["vip"] = value(report.vip);
  j["combined"] = value(report.combined);
  j["ra"] = ordered{{"ba", value(report.ba)}, {"f1", value(report.f1)}};
  j["as"] = value(report.as);
  j["n_samples"] = report.n_samples;
  j["flags"] = report.flags;
  return j.dump(2) + "\n";
}

FlowSequence flows_from_frames(const std::map<int, GrayImage>& frames, const PipelineConfig& config) {
  FlowSequence flows;
  for (auto it = frames.begin(); it != frames.end(); ++it) {
    auto next = std::next(it);
    if (next == frames.end()) break;
    if (next->first != it->first + 1) continue;
    flows.emplace(it->first, std::make_shared<const FlowField>(estimate_flow_block_matching(
                                 it->second, next->second, config.block_size, config.search_radius)));
  }
  return flows;
}

}  // namespace vruik
