#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vruik/core.hpp"

namespace vruik {

// Object detection: recall of ground truth under optimal one-to-one matching.
struct DetectionEvalInput {
  std::vector<BoundingBox> ground_truth;
  std::vector<BoundingBox> predictions;
  double iou_threshold{0.5};
};

struct OdCounts {
  std::size_t matched{0};
  std::size_t ground_truth{0};
};

/// (ground truth, prediction) pairs of the optimal inverse-IoU assignment
/// that reach iou >= iou_threshold, ascending by ground-truth index.
std::vector<std::pair<std::size_t, std::size_t>> od_matches(const DetectionEvalInput& input);

OdCounts od_counts(const DetectionEvalInput& input);

struct OdResult {
  double accuracy{1.0};
  bool empty_ground_truth{false};
};

/// matched / N_gt; an empty ground-truth set scores 1.0 and is flagged.
OdResult od_accuracy(const DetectionEvalInput& input);

/// A ground-truth intent with its prediction; nullopt marks an object that
/// was not matched and therefore counts as wrong on both axes.
struct IntentPair {
  std::optional<IntentLabel> predicted;
  IntentLabel truth;
};

struct IntentAccuracy {
  double lip{0.0};
  double vip{0.0};
  double combined{0.0};
};

/// Throws UndefinedMetric for an empty pair list.
IntentAccuracy intent_accuracy(const std::vector<IntentPair>& pairs);

struct ConfusionCounts {
  std::size_t tp{0};
  std::size_t fp{0};
  std::size_t tn{0};
  std::size_t fn{0};
};

double balanced_accuracy(const ConfusionCounts& c);
double positive_f1(const ConfusionCounts& c);

struct RiskMetrics {
  double balanced_accuracy{0.0};
  double f1{0.0};
};

/// Both components; throws UndefinedMetric naming the first undefined one.
RiskMetrics risk_metrics(const ConfusionCounts& counts);

struct ActionPair {
  std::string id;
  std::string candidate;
  std::string reference;
};

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual double score(const ActionPair& pair) const = 0;
};

/// Token-level F1 after lowercasing and stripping punctuation. Two empty
/// texts score 1, one empty text scores 0.
class TokenF1Scorer final : public SimilarityScorer {
 public:
  double score(const ActionPair& pair) const override;
};

std::vector<std::string> tokenize(const std::string& text);
double token_f1(const std::string& candidate, const std::string& reference);

/// Scores computed elsewhere (for instance BERTScore F1), looked up by id.
class PrecomputedScorer final : public SimilarityScorer {
 public:
  explicit PrecomputedScorer(std::map<std::string, double> scores) : scores_(std::move(scores)) {}
  /// Throws InvalidInput when the id has no score.
  double score(const ActionPair& pair) const override;

 private:
  std::map<std::string, double> scores_;
};

/// Mean per-pair score, clamped per pair to [0, 1]. Throws UndefinedMetric
/// for an empty list.
double action_similarity(const std::vector<ActionPair>& pairs, const SimilarityScorer& scorer);

}  // namespace vruik
