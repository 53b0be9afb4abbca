#include "vruik/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "vruik/error.hpp"

namespace vruik {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidInput("ragged cost matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

double assignment_objective(const CostMatrix& cost,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                            double max_cost) {
  double sum = 0.0;
  for (auto [r, c] : pairs) sum += cost(r, c);
  const std::size_t slots = std::max(cost.rows(), cost.cols());
  return sum + max_cost * double(slots - pairs.size());
}

CostMatrix build_cost_matrix(const std::vector<BoundingBox>& tracks,
                             const std::vector<BoundingBox>& annotations) {
  CostMatrix cost(tracks.size(), annotations.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < annotations.size(); ++j) cost(i, j) = 1.0 - iou(tracks[i], annotations[j]);
  }
  return cost;
}

namespace {

AssignmentResult finish(const CostMatrix& cost, std::vector<std::pair<std::size_t, std::size_t>> pairs,
                        double max_cost) {
  std::sort(pairs.begin(), pairs.end());
  AssignmentResult out;
  std::vector<bool> row_used(cost.rows(), false), col_used(cost.cols(), false);
  for (auto [r, c] : pairs) row_used[r] = col_used[c] = true;
  for (std::size_t r = 0; r < cost.rows(); ++r)
    if (!row_used[r]) out.unmatched_rows.push_back(r);
  for (std::size_t c = 0; c < cost.cols(); ++c)
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  out.total_cost = assignment_objective(cost, pairs, max_cost);
  out.pairs = std::move(pairs);
  return out;
}

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Square min-cost perfect matching (shortest augmenting path with
// potentials). Returns false when the iteration budget runs out.
struct SquareSolver {
  std::size_t k;
  std::vector<double> a;  // k x k
  std::vector<double> u, v;
  std::vector<std::size_t> row_of_col;  // 1-based rows, 0 = free

  double at(std::size_t i, std::size_t j) const { return a[(i - 1) * k + (j - 1)]; }

  bool solve(std::size_t max_iterations) {
    const double inf = std::numeric_limits<double>::infinity();
    u.assign(k + 1, 0.0);
    v.assign(k + 1, 0.0);
    row_of_col.assign(k + 1, 0);
    std::vector<std::size_t> way(k + 1, 0);
    std::size_t iterations = 0;
    for (std::size_t i = 1; i <= k; ++i) {
      row_of_col[0] = i;
      std::size_t j0 = 0;
      std::vector<double> minv(k + 1, inf);
      std::vector<bool> used(k + 1, false);
      do {
        if (++iterations > max_iterations) return false;
        used[j0] = true;
        const std::size_t i0 = row_of_col[j0];
        double delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= k; ++j) {
          if (used[j]) continue;
          const double cur = at(i0, j) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        if (!std::isfinite(delta) || j1 == 0) return false;
        for (std::size_t j = 0; j <= k; ++j) {
          if (used[j]) {
            u[row_of_col[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (row_of_col[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        row_of_col[j0] = row_of_col[j1];
        j0 = j1;
      } while (j0 != 0);
    }
    for (double x : u)
      if (!std::isfinite(x)) return false;
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

// Walks the optimal matching towards the lexicographically smallest one.
// Every optimal matching uses only edges that are tight under the final
// potentials, so forcing an edge reduces to finding an alternating path in
// the tight subgraph.
class TightGraphRefiner {
 public:
  TightGraphRefiner(const SquareSolver& s, double eps) : s_(s), eps_(eps), k_(s.k) {
    row_mate_.assign(k_, kNone);
    col_mate_.assign(k_, kNone);
    for (std::size_t j = 1; j <= k_; ++j) {
      const std::size_t i = s.row_of_col[j];
      row_mate_[i - 1] = j - 1;
      col_mate_[j - 1] = i - 1;
    }
    fixed_row_.assign(k_, false);
    fixed_col_.assign(k_, false);
  }

  bool tight(std::size_t r, std::size_t c) const {
    return s_.at(r + 1, c + 1) - s_.u[r + 1] - s_.v[c + 1] <= eps_;
  }

  // Tries to move row r onto column c while keeping fixed pairs intact.
  bool force(std::size_t r, std::size_t c) {
    if (fixed_col_[c] || !tight(r, c)) return false;
    if (row_mate_[r] == c) return commit(r, c);

    const auto saved_rows = row_mate_;
    const auto saved_cols = col_mate_;
    const std::size_t displaced = col_mate_[c];
    const std::size_t released = row_mate_[r];
    col_mate_[released] = kNone;
    row_mate_[r] = c;
    col_mate_[c] = r;
    row_mate_[displaced] = kNone;
    fixed_row_[r] = fixed_col_[c] = true;
    visited_.assign(k_, false);
    const bool ok = augment(displaced);
    fixed_row_[r] = fixed_col_[c] = false;
    if (!ok) {
      row_mate_ = saved_rows;
      col_mate_ = saved_cols;
      return false;
    }
    return commit(r, c);
  }

  std::size_t row_mate(std::size_t r) const { return row_mate_[r]; }

 private:
  bool commit(std::size_t r, std::size_t c) {
    fixed_row_[r] = fixed_col_[c] = true;
    return true;
  }

  bool augment(std::size_t r) {
    for (std::size_t c = 0; c < k_; ++c) {
      if (fixed_col_[c] || visited_[c] || !tight(r, c)) continue;
      visited_[c] = true;
      if (col_mate_[c] == kNone || augment(col_mate_[c])) {
        row_mate_[r] = c;
        col_mate_[c] = r;
        return true;
      }
    }
    return false;
  }

  const SquareSolver& s_;
  double eps_;
  std::size_t k_;
  std::vector<std::size_t> row_mate_, col_mate_;
  std::vector<bool> fixed_row_, fixed_col_, visited_;
};

}  // namespace

std::optional<AssignmentResult> try_hungarian_assign(const CostMatrix& cost, double max_cost,
                                                     std::size_t max_iterations) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost(i, j);
      if (!std::isfinite(c) || c < 0.0) return std::nullopt;
      scale = std::max(scale, c);
    }
  }
  if (!std::isfinite(max_cost)) return std::nullopt;
  if (n == 0 || m == 0 || max_cost <= 0.0) return finish(cost, {}, max_cost);

  // Rows: n real + m dummy. Columns: m real + n dummy. Leaving a real row or
  // column unmatched costs max_cost / 2, so an unmatched (row, col) couple
  // costs exactly one pair at the threshold.
  SquareSolver s;
  s.k = n + m;
  const double half = max_cost / 2.0;
  const double forbidden = max_cost + 1.0;
  s.a.assign(s.k * s.k, 0.0);
  for (std::size_t i = 0; i < s.k; ++i) {
    for (std::size_t j = 0; j < s.k; ++j) {
      double c = 0.0;
      if (i < n && j < m) {
        c = cost(i, j) < max_cost ? cost(i, j) : forbidden;
      } else if (i < n || j < m) {
        c = half;
      }
      s.a[i * s.k + j] = c;
    }
  }
  if (max_iterations == 0) max_iterations = 4 * (s.k + 1) * (s.k + 1) * (s.k + 1) + 1000;
  if (!s.solve(max_iterations)) return std::nullopt;

  const double eps = 1e-9 * std::max(scale, max_cost + 1.0);
  TightGraphRefiner refine(s, eps);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (std::size_t j = 0; j < m && !placed; ++j) {
      if (cost(i, j) < max_cost && refine.force(i, j)) {
        pairs.emplace_back(i, j);
        placed = true;
      }
    }
    for (std::size_t j = m; j < s.k && !placed; ++j) placed = refine.force(i, j);
    if (!placed) return std::nullopt;
  }
  return finish(cost, std::move(pairs), max_cost);
}

AssignmentResult hungarian_assign(const CostMatrix& cost, double max_cost) {
  auto result = try_hungarian_assign(cost, max_cost);
  if (!result) throw InvalidInput("assignment solver failed (non-finite or negative cost)");
  return *result;
}

AssignmentResult greedy_assign(const CostMatrix& cost, double max_cost) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> valid;
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      if (cost(i, j) < max_cost) valid.emplace_back(cost(i, j), i, j);
    }
  }
  std::sort(valid.begin(), valid.end());
  std::vector<bool> row_used(cost.rows(), false), col_used(cost.cols(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (auto [c, i, j] : valid) {
    if (row_used[i] || col_used[j]) continue;
    row_used[i] = col_used[j] = true;
    pairs.emplace_back(i, j);
  }
  return finish(cost, std::move(pairs), max_cost);
}

namespace {

bool same_category(ObjectClass track, ObjectClass annotation) {
  return (track == ObjectClass::person) == (annotation == ObjectClass::person);
}

}  // namespace

MatchResult match_tracks_to_annotations(const std::vector<Track>& tracks,
                                        const std::vector<ClassBox>& annotations, int frame,
                                        double theta_iou, double dedup_iou) {
  const double max_cost = 1.0 - theta_iou;
  std::vector<std::size_t> active;
  std::vector<const Observation*> boxes;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (const auto* obs = observation_at_or_before(tracks[i], frame)) {
      active.push_back(i);
      boxes.push_back(obs);
    }
  }
  const auto kept = deduplicate_indices(annotations, dedup_iou);

  CostMatrix cost(active.size(), kept.size());
  const double forbidden = std::max(1.0, max_cost);
  for (std::size_t r = 0; r < active.size(); ++r) {
    for (std::size_t c = 0; c < kept.size(); ++c) {
      const auto& ann = annotations[kept[c]];
      cost(r, c) = same_category(tracks[active[r]].object_class, ann.object_class)
                       ? 1.0 - iou(boxes[r]->box, ann.box)
                       : forbidden;
    }
  }

  MatchResult out;
  AssignmentResult local;
  if (active.empty()) {
    local = finish(cost, {}, max_cost);
  } else if (auto solved = try_hungarian_assign(cost, max_cost)) {
    local = std::move(*solved);
  } else {
    local = greedy_assign(cost, max_cost);
    out.used_greedy_fallback = true;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (auto [r, c] : local.pairs) pairs.emplace_back(active[r], kept[c]);
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> track_used(tracks.size(), false), ann_used(annotations.size(), false);
  for (auto [t, a] : pairs) track_used[t] = ann_used[a] = true;
  for (std::size_t t = 0; t < tracks.size(); ++t)
    if (!track_used[t]) out.assignment.unmatched_rows.push_back(t);
  for (std::size_t a = 0; a < annotations.size(); ++a)
    if (!ann_used[a]) out.assignment.unmatched_cols.push_back(a);
  out.assignment.pairs = std::move(pairs);
  out.assignment.total_cost = local.total_cost;
  return out;
}

}  // namespace vruik
