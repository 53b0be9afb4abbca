#include "vruik/tracklink.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "vruik/error.hpp"

namespace vruik {

void LinkConfig::validate() const {
  if (std::abs(w_s + w_t - 1.0) > 1e-9) throw InvalidInput("w_s + w_t must equal 1");
  if (w_s < 0.0 || w_t < 0.0) throw InvalidInput("link weights must be non-negative");
  for (double t : {theta_short, theta_long}) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("link thresholds must lie in [0, 1]");
  }
  if (t_max < 1) throw InvalidInput("t_max must be >= 1");
  if (d_base < 0.0 || d_per_frame < 0.0) throw InvalidInput("distance limits must be >= 0");
  if (motion_fit_window < 1) throw InvalidInput("motion_fit_window must be >= 1");
}

TrackEndPrediction predict_track_end(const Track& track, int delta_t, int fit_window) {
  if (track.observations.empty()) throw InvalidInput("cannot predict the end of an empty track");
  const auto& obs = track.observations;
  const std::size_t n = std::min<std::size_t>(obs.size(), std::max(fit_window, 1));
  if (n < 3) return {center(obs.back().box), 0.5};

  const auto first = obs.end() - static_cast<std::ptrdiff_t>(n);
  double mt = 0.0, mx = 0.0, my = 0.0;
  for (auto it = first; it != obs.end(); ++it) {
    const Point2 c = center(it->box);
    mt += it->frame;
    mx += c.x;
    my += c.y;
  }
  mt /= double(n);
  mx /= double(n);
  my /= double(n);

  double stt = 0.0, stx = 0.0, sty = 0.0;
  for (auto it = first; it != obs.end(); ++it) {
    const Point2 c = center(it->box);
    const double dt = it->frame - mt;
    stt += dt * dt;
    stx += dt * (c.x - mx);
    sty += dt * (c.y - my);
  }
  const double vx = stx / stt;
  const double vy = sty / stt;

  double ss_res = 0.0, ss_tot = 0.0;
  for (auto it = first; it != obs.end(); ++it) {
    const Point2 c = center(it->box);
    const double dt = it->frame - mt;
    const double rx = c.x - (mx + vx * dt);
    const double ry = c.y - (my + vy * dt);
    ss_res += rx * rx + ry * ry;
    ss_tot += (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
  }
  double alpha = 1.0;
  if (ss_tot > 0.0) alpha = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);

  const double t = obs.back().frame + delta_t - mt;
  return {{mx + vx * t, my + vy * t}, alpha};
}

LinkCandidate link_score(const TrackEndPrediction& end_of_from, Point2 start_of_to, int delta_t,
                         const LinkConfig& config) {
  if (delta_t < 1) throw NotLinkable("tracks overlap in time (delta_t = " + std::to_string(delta_t) + ")");
  LinkCandidate c;
  c.delta_t = delta_t;
  c.alpha = std::clamp(end_of_from.alpha, 0.0, 1.0);
  c.d_spatial = std::hypot(end_of_from.position.x - start_of_to.x, end_of_from.position.y - start_of_to.y);
  const double spatial = std::clamp(1.0 - c.d_spatial / config.d_max(delta_t), 0.0, 1.0);
  const double temporal = std::clamp(1.0 - double(delta_t) / double(config.t_max), 0.0, 1.0);
  c.score = spatial * config.w_s + temporal * config.w_t;
  c.adjusted_score = c.score * (0.5 + 0.5 * c.alpha);
  return c;
}

namespace {

struct Fragment {
  Track track;
  std::vector<std::string> member_ids;  // original fragment ids, chain order
};

}  // namespace

LinkReport link_tracks_with_report(const std::vector<Track>& tracks, const LinkConfig& config) {
  config.validate();
  std::vector<Fragment> current;
  std::set<std::string> seen;
  for (const auto& t : tracks) {
    validate_track(t);
    if (!seen.insert(t.id).second) throw InvalidInput("duplicate track id '" + t.id + "'");
    current.push_back({t, {t.id}});
  }

  LinkReport report;
  while (true) {
    struct Scored {
      LinkCandidate candidate;
      std::size_t from;
      std::size_t to;
    };
    std::vector<Scored> acceptable;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const Track& a = current[i].track;
      for (std::size_t j = 0; j < current.size(); ++j) {
        if (i == j) continue;
        const Track& b = current[j].track;
        if (a.object_class != b.object_class) continue;
        const int delta_t = b.first_frame() - a.last_frame();
        if (delta_t < 1 || delta_t > config.t_max) continue;
        const auto prediction = predict_track_end(a, delta_t, config.motion_fit_window);
        auto cand = link_score(prediction, center(b.observations.front().box), delta_t, config);
        if (cand.d_spatial > config.d_max(delta_t)) continue;
        if (!(cand.adjusted_score > config.threshold(delta_t))) continue;
        cand.from_track = current[i].member_ids.back();
        cand.to_track = current[j].member_ids.front();
        acceptable.push_back({cand, i, j});
      }
    }
    if (acceptable.empty()) break;

    std::sort(acceptable.begin(), acceptable.end(), [](const Scored& a, const Scored& b) {
      return std::tie(b.candidate.adjusted_score, a.from, a.to) <
             std::tie(a.candidate.adjusted_score, b.from, b.to);
    });

    std::vector<long> next(current.size(), -1);
    std::vector<bool> has_prev(current.size(), false);
    for (const auto& s : acceptable) {
      if (next[s.from] != -1 || has_prev[s.to]) continue;
      next[s.from] = static_cast<long>(s.to);
      has_prev[s.to] = true;
      report.accepted.push_back(s.candidate);
    }

    // Chains start at fragments without a predecessor. delta_t >= 1 rules out cycles.
    std::vector<Fragment> merged;
    for (std::size_t head = 0; head < current.size(); ++head) {
      if (has_prev[head]) continue;
      Fragment chain = std::move(current[head]);
      for (long k = next[head]; k != -1; k = next[static_cast<std::size_t>(k)]) {
        auto& part = current[static_cast<std::size_t>(k)];
        chain.track.observations.insert(chain.track.observations.end(),
                                        part.track.observations.begin(), part.track.observations.end());
        chain.member_ids.insert(chain.member_ids.end(), part.member_ids.begin(), part.member_ids.end());
      }
      merged.push_back(std::move(chain));
    }
    current = std::move(merged);
  }

  for (auto& f : current) report.tracks.push_back(std::move(f.track));
  return report;
}

std::vector<Track> link_tracks(const std::vector<Track>& tracks, const LinkConfig& config) {
  return link_tracks_with_report(tracks, config).tracks;
}

}  // namespace vruik
