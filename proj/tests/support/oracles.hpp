#pragma once

// Independent reference implementations used by the tests. They favour
// obviousness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/matching.hpp"

namespace oracle {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

struct BruteForceResult {
  Pairs pairs;
  double total_cost{0.0};
};

// Every partial matching over pairs with cost < max_cost. Objective: matched
// sum (row order) plus max_cost per empty slot of the max(n, m) square.
// Ties go to the lexicographically smallest sorted pair list.
inline BruteForceResult brute_force_assignment(const vruik::CostMatrix& cost, double max_cost) {
  const std::size_t n = cost.rows(), m = cost.cols();
  const std::size_t slots = std::max(n, m);
  BruteForceResult best;
  best.total_cost = std::numeric_limits<double>::infinity();
  std::vector<bool> col_used(m, false);
  Pairs current;

  std::function<void(std::size_t)> visit = [&](std::size_t row) {
    if (row == n) {
      double sum = 0.0;
      for (auto [r, c] : current) sum += cost(r, c);
      sum += max_cost * double(slots - current.size());
      if (sum < best.total_cost || (sum == best.total_cost && current < best.pairs)) {
        best.total_cost = sum;
        best.pairs = current;
      }
      return;
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (col_used[c] || !(cost(row, c) < max_cost)) continue;
      col_used[c] = true;
      current.emplace_back(row, c);
      visit(row + 1);
      current.pop_back();
      col_used[c] = false;
    }
    visit(row + 1);
  };
  visit(0);
  return best;
}

// IoU of integer boxes by counting unit pixels [x, x+1) x [y, y+1).
inline double pixel_iou(int ax1, int ay1, int ax2, int ay2, int bx1, int by1, int bx2, int by2) {
  const int x_lo = std::min(ax1, bx1), x_hi = std::max(ax2, bx2);
  const int y_lo = std::min(ay1, by1), y_hi = std::max(ay2, by2);
  long inter = 0, uni = 0;
  for (int y = y_lo; y < y_hi; ++y) {
    for (int x = x_lo; x < x_hi; ++x) {
      const bool in_a = x >= ax1 && x < ax2 && y >= ay1 && y < ay2;
      const bool in_b = x >= bx1 && x < bx2 && y >= by1 && y < by2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

// Ordinary least squares y = a + b t via the 2x2 normal equations.
struct LineFit {
  double intercept{0.0};
  double slope{0.0};
  double ss_res{0.0};
  double ss_tot{0.0};
};

inline LineFit least_squares(const std::vector<double>& t, const std::vector<double>& y) {
  long double n = t.size(), st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += (long double)t[i] * t[i];
    sty += (long double)t[i] * y[i];
  }
  const long double det = n * stt - st * st;
  LineFit f;
  f.slope = double((n * sty - st * sy) / det);
  f.intercept = double((stt * sy - st * sty) / det);
  const long double mean = sy / n;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const long double r = y[i] - (f.intercept + f.slope * t[i]);
    f.ss_res += double(r * r);
    f.ss_tot += double((y[i] - mean) * (y[i] - mean));
  }
  return f;
}

// Affinity score written out term by term.
inline std::pair<double, double> link_scores(double d_spatial, int delta_t, double alpha, double w_s, double w_t,
                                             double d_base, double d_per_frame, int t_max) {
  const double d_max = d_base + d_per_frame * delta_t;
  double spatial_term = 1.0 - d_spatial / d_max;
  if (spatial_term < 0.0) spatial_term = 0.0;
  if (spatial_term > 1.0) spatial_term = 1.0;
  double temporal_term = 1.0 - double(delta_t) / double(t_max);
  if (temporal_term < 0.0) temporal_term = 0.0;
  if (temporal_term > 1.0) temporal_term = 1.0;
  const double s = spatial_term * w_s + temporal_term * w_t;
  return {s, s * (0.5 + 0.5 * alpha)};
}

// Random cost matrices: continuous in [0, 1) or dyadic (multiples of 1/16,
// so sums are exact and ties are common).
inline vruik::CostMatrix random_cost_matrix(std::mt19937_64& rng, std::size_t n, std::size_t m, bool dyadic) {
  vruik::CostMatrix c(n, m);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> q(0, 16);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) c(i, j) = dyadic ? q(rng) / 16.0 : u(rng);
  return c;
}

}  // namespace oracle
