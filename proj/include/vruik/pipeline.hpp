#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vruik/curation.hpp"
#include "vruik/datasetio.hpp"
#include "vruik/egomotion.hpp"
#include "vruik/intent.hpp"
#include "vruik/metrics.hpp"
#include "vruik/synth.hpp"
#include "vruik/tracklink.hpp"

namespace vruik {

enum class FlowSource { precomputed, block_matching };

struct PipelineConfig {
  CurationConfig curation;
  LinkConfig link;
  double theta_iou{0.3};
  double dedup_iou{0.9};
  IntentConfig intent;
  FlowSource flow_source{FlowSource::precomputed};
  FlowAggregator aggregator{FlowAggregator::median};
  double region_margin_frac{0.5};
  int block_size{16};
  int search_radius{12};
  FrameSize frame{1928, 1280};
  /// Frame whose track boxes are matched to the annotations; defaults to
  /// the latest frame seen in the tracks.
  std::optional<int> key_frame;

  void validate() const;
};

/// Parses `key = value` lines with optional `[section]` headers; '#' starts
/// a comment. Keys are the PipelineConfig field names, nested ones written
/// as section.key (for example `link.theta_short = 0.2`).
PipelineConfig parse_pipeline_config(const std::string& text, PipelineConfig base = {});

struct AnnotationOutcome {
  SceneAnnotation sample;
  std::vector<std::string> flags;
};

/// Fills Intent and Position for every object of the sample.
///
/// Tracks are linked, then matched per class to the annotation boxes at the
/// key frame. Each matched object's camera motion comes from the flow in a
/// ring around its tracked box on every frame. Unmatched objects get
/// (stationary, stationary) and their position from the annotation box.
/// Samples that already carry an intent are left untouched unless `force`.
AnnotationOutcome annotate_sample(const SceneAnnotation& sample, const std::vector<Track>& tracks,
                                  const FlowSequence& flows, const PipelineConfig& config = {},
                                  bool force = false);

struct SampleInputs {
  std::vector<Track> tracks;
  FlowSequence flows;
};

/// Loads the tracks and flows of one sample; called from worker threads.
using SampleInputLoader = std::function<SampleInputs(const std::string& sample_id)>;

struct DatasetAnnotation {
  Dataset samples;
  std::map<std::string, std::vector<std::string>> flags;  // by sample id
};

/// annotate_sample over a dataset with a pool of `jobs` workers. A sample
/// whose inputs fail to load keeps its input form and gets an error flag.
DatasetAnnotation annotate_dataset(const Dataset& samples, const SampleInputLoader& loader,
                                   const PipelineConfig& config = {}, bool force = false, int jobs = 1);

enum class EvaluationMode { full, gt_boxes };

struct EvaluationReport {
  std::optional<double> od;
  std::optional<double> lip;
  std::optional<double> vip;
  std::optional<double> combined;
  std::optional<double> ba;
  std::optional<double> f1;
  std::optional<double> as;
  std::size_t n_samples{0};
  std::size_t n_intent_pairs{0};
  std::vector<std::string> flags;
};

/// Scores predictions against ground truth on the samples present in both.
///
/// In full mode a ground-truth object takes the intent of the prediction it
/// is matched to (inverse-IoU assignment, IoU >= 0.5, per class); unmatched
/// objects count as wrong. In gt_boxes mode objects pair by id. Throws
/// EvaluationImpossible when no sample id is shared.
EvaluationReport run_evaluation(const Dataset& gt, const Dataset& pred, EvaluationMode mode,
                                const SimilarityScorer& scorer);
EvaluationReport run_evaluation(const Dataset& gt, const Dataset& pred, EvaluationMode mode);

/// {"od", "lip", "vip", "combined", "ra": {"ba", "f1"}, "as", "n_samples", "flags"};
/// undefined metrics are null.
std::string report_to_json(const EvaluationReport& report);

/// Flow between consecutive frames estimated by block matching.
FlowSequence flows_from_frames(const std::map<int, GrayImage>& frames, const PipelineConfig& config);

}  // namespace vruik
