#pragma once

#include <string>
#include <vector>

#include "vruik/core.hpp"

namespace vruik {

struct LinkConfig {
  double w_s{0.6};
  double w_t{0.4};
  double d_base{50.0};
  double d_per_frame{20.0};
  int t_max{30};
  double theta_short{0.2};
  double theta_long{0.3};
  int short_gap_frames{3};
  int motion_fit_window{5};

  void validate() const;

  /// Largest admissible spatial distance for a gap of `delta_t` frames.
  double d_max(int delta_t) const noexcept { return d_base + d_per_frame * delta_t; }
  /// Acceptance threshold: theta_short for gaps up to short_gap_frames.
  double threshold(int delta_t) const noexcept {
    return delta_t <= short_gap_frames ? theta_short : theta_long;
  }
};

struct TrackEndPrediction {
  Point2 position;
  double alpha{0.5};  // motion-fit confidence in [0, 1]
};

/// Constant-velocity extrapolation of the box center, `delta_t` frames past
/// the last observation. The line is a least-squares fit over the last
/// `fit_window` observations; alpha is the pooled x/y coefficient of
/// determination clamped to [0, 1] (1 for a perfectly stationary fit).
/// Fewer than three observations yields the last center with alpha 0.5.
TrackEndPrediction predict_track_end(const Track& track, int delta_t, int fit_window = 5);

struct LinkCandidate {
  std::string from_track;
  std::string to_track;
  double d_spatial{0.0};
  int delta_t{0};
  double alpha{0.0};
  double score{0.0};           // S
  double adjusted_score{0.0};  // S * (0.5 + 0.5 * alpha)
};

/// Affinity between a predicted track end and the start of a later track.
/// Each term is clamped to [0, 1] before weighting. Throws NotLinkable when
/// delta_t < 1.
LinkCandidate link_score(const TrackEndPrediction& end_of_from, Point2 start_of_to, int delta_t,
                         const LinkConfig& config = {});

struct LinkReport {
  std::vector<Track> tracks;
  std::vector<LinkCandidate> accepted;  // in acceptance order, ids of the original fragments
};

/// Repairs fragmented tracks.
///
/// Candidates are same-class (end, start) pairs with 1 <= delta_t <= t_max
/// and d_spatial <= d_max(delta_t). A candidate is acceptable when its
/// adjusted score exceeds the gap-dependent threshold. Acceptable candidates
/// are taken greedily by descending adjusted score so every end and every
/// start is used once; linked chains are concatenated under the earliest
/// fragment's id. Rounds repeat until nothing more links.
LinkReport link_tracks_with_report(const std::vector<Track>& tracks, const LinkConfig& config = {});

std::vector<Track> link_tracks(const std::vector<Track>& tracks, const LinkConfig& config = {});

}  // namespace vruik
