#include "vruik/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "vruik/error.hpp"
#include "vruik/matching.hpp"

namespace vruik {

std::vector<std::pair<std::size_t, std::size_t>> od_matches(const DetectionEvalInput& input) {
  if (!(input.iou_threshold > 0.0 && input.iou_threshold <= 1.0))
    throw InvalidInput("iou threshold must lie in (0, 1]");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (input.ground_truth.empty() || input.predictions.empty()) return out;

  const CostMatrix cost = build_cost_matrix(input.ground_truth, input.predictions);
  // iou == threshold must count, while the solver admits only cost < max_cost.
  const double max_cost = std::nextafter(1.0 - input.iou_threshold, 2.0);
  for (auto [g, p] : hungarian_assign(cost, max_cost).pairs) {
    if (iou(input.ground_truth[g], input.predictions[p]) >= input.iou_threshold) out.emplace_back(g, p);
  }
  return out;
}

OdCounts od_counts(const DetectionEvalInput& input) {
  return {od_matches(input).size(), input.ground_truth.size()};
}

OdResult od_accuracy(const DetectionEvalInput& input) {
  const OdCounts c = od_counts(input);
  if (c.ground_truth == 0) return {1.0, true};
  return {double(c.matched) / double(c.ground_truth), false};
}

IntentAccuracy intent_accuracy(const std::vector<IntentPair>& pairs) {
  if (pairs.empty()) throw UndefinedMetric("intent", "no intent pairs to score");
  std::size_t lat = 0, ver = 0, both = 0;
  for (const auto& p : pairs) {
    if (!p.predicted) continue;
    const bool l = p.predicted->lateral == p.truth.lateral;
    const bool v = p.predicted->vertical == p.truth.vertical;
    lat += l;
    ver += v;
    both += l && v;
  }
  const double n = double(pairs.size());
  return {double(lat) / n, double(ver) / n, double(both) / n};
}

double balanced_accuracy(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw UndefinedMetric("ba", "no positive samples (TP + FN = 0)");
  if (c.tn + c.fp == 0) throw UndefinedMetric("ba", "no negative samples (TN + FP = 0)");
  // One division over a common denominator, so exact ratios stay exact.
  const double pos = double(c.tp + c.fn), neg = double(c.tn + c.fp);
  return (double(c.tp) * neg + double(c.tn) * pos) / (2.0 * pos * neg);
}

double positive_f1(const ConfusionCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) throw UndefinedMetric("f1", "2TP + FP + FN = 0");
  return double(2 * c.tp) / double(denom);
}

RiskMetrics risk_metrics(const ConfusionCounts& counts) {
  return {balanced_accuracy(counts), positive_f1(counts)};
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char ch : text) {
    cleaned.push_back(std::ispunct(ch) ? ' ' : static_cast<char>(std::tolower(ch)));
  }
  std::istringstream in(cleaned);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  return tokens;
}

double token_f1(const std::string& candidate, const std::string& reference) {
  auto cand = tokenize(candidate);
  auto ref = tokenize(reference);
  if (cand.empty() && ref.empty()) return 1.0;
  if (cand.empty() || ref.empty()) return 0.0;
  std::sort(cand.begin(), cand.end());
  std::sort(ref.begin(), ref.end());
  std::vector<std::string> common;
  std::set_intersection(cand.begin(), cand.end(), ref.begin(), ref.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double precision = double(common.size()) / double(cand.size());
  const double recall = double(common.size()) / double(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double TokenF1Scorer::score(const ActionPair& pair) const {
  return token_f1(pair.candidate, pair.reference);
}

double PrecomputedScorer::score(const ActionPair& pair) const {
  auto it = scores_.find(pair.id);
  if (it == scores_.end()) throw InvalidInput("no precomputed similarity score for '" + pair.id + "'");
  return it->second;
}

double action_similarity(const std::vector<ActionPair>& pairs, const SimilarityScorer& scorer) {
  if (pairs.empty()) throw UndefinedMetric("as", "no action pairs to score");
  double sum = 0.0;
  for (const auto& p : pairs) sum += std::clamp(scorer.score(p), 0.0, 1.0);
  return sum / double(pairs.size());
}

}  // namespace vruik
