#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/curation.hpp"

namespace vruik {

/// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

struct AssignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), ascending by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  /// Sum of matched costs plus max_cost for every slot of the conceptual
  /// max(rows, cols) square left without a valid pair.
  double total_cost{0.0};
};

/// Objective shared by both solvers: matched costs summed in row order plus
/// max_cost per unfilled slot of the padded square.
double assignment_objective(const CostMatrix& cost,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                            double max_cost);

/// C(i, j) = 1 - iou(tracks[i], annotations[j]).
CostMatrix build_cost_matrix(const std::vector<BoundingBox>& tracks,
                             const std::vector<BoundingBox>& annotations);

/// Optimal assignment using only pairs with cost < max_cost.
///
/// Rectangular inputs are padded to a square with max_cost, so a row or
/// column without a valid partner costs exactly as much as a pair at the
/// threshold. Among equal optima the lexicographically smallest pair list is
/// returned. nullopt signals solver failure: a non-finite or negative cost,
/// or the iteration cap being hit.
std::optional<AssignmentResult> try_hungarian_assign(const CostMatrix& cost, double max_cost,
                                                     std::size_t max_iterations = 0);

/// As try_hungarian_assign; throws InvalidInput on failure.
AssignmentResult hungarian_assign(const CostMatrix& cost, double max_cost);

/// Repeatedly takes the cheapest remaining valid pair, ties by (row, col).
AssignmentResult greedy_assign(const CostMatrix& cost, double max_cost);

struct MatchResult {
  AssignmentResult assignment;  // indices into the caller's track / annotation lists
  bool used_greedy_fallback{false};
};

/// Matches tracks to annotation boxes at `frame`.
///
/// Each track contributes its box at or nearest before `frame`; tracks with
/// no such observation stay unmatched. Annotations are deduplicated first and
/// duplicates reported unmatched. Costs across classes are forbidden; bicycle
/// and cyclist tracks both match cyclist annotations.
MatchResult match_tracks_to_annotations(const std::vector<Track>& tracks,
                                        const std::vector<ClassBox>& annotations, int frame,
                                        double theta_iou = 0.3, double dedup_iou = 0.9);

}  // namespace vruik
