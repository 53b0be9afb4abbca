#include "vruik/curation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "vruik/error.hpp"

namespace vruik {

void CurationConfig::validate() const {
  auto fraction = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!fraction(min_height_frac) || !fraction(min_width_frac) || !fraction(min_visible_frac) ||
      !fraction(cyclist_pair_iou)) {
    throw InvalidInput("curation fractions must lie in (0, 1]");
  }
  if (max_per_class < 1) throw InvalidInput("max_per_class must be >= 1");
  if (!(cyclist_max_vertical_offset_px >= 0.0))
    throw InvalidInput("cyclist_max_vertical_offset_px must be >= 0");
}

CyclistAssociation associate_cyclists(const std::vector<Detection>& detections,
                                      const CurationConfig& config) {
  struct Pair {
    double overlap;
    std::size_t person;
    std::size_t bicycle;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < detections.size(); ++p) {
    if (detections[p].object_class != ObjectClass::person) continue;
    const Point2 pc = center(detections[p].box);
    for (std::size_t b = 0; b < detections.size(); ++b) {
      if (detections[b].object_class != ObjectClass::bicycle) continue;
      const Point2 bc = center(detections[b].box);
      const double overlap = iou(detections[p].box, detections[b].box);
      if (overlap > config.cyclist_pair_iou && pc.y < bc.y &&
          bc.y - pc.y <= config.cyclist_max_vertical_offset_px) {
        pairs.push_back({overlap, p, b});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(b.overlap, a.person, a.bicycle) < std::tie(a.overlap, b.person, b.bicycle);
  });

  std::vector<bool> used(detections.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> accepted;
  for (const auto& pair : pairs) {
    if (used[pair.person] || used[pair.bicycle]) continue;
    used[pair.person] = used[pair.bicycle] = true;
    accepted.emplace_back(pair.person, pair.bicycle);
  }
  std::sort(accepted.begin(), accepted.end());

  CyclistAssociation out;
  for (auto [p, b] : accepted) {
    const auto& person = detections[p];
    const auto& bicycle = detections[b];
    out.cyclists.push_back({ObjectClass::cyclist, union_box(person.box, bicycle.box),
                            std::min(person.confidence, bicycle.confidence), person.frame});
  }
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (!used[i]) out.remaining.push_back(detections[i]);
  }
  return out;
}

std::vector<Detection> filter_frame(const std::vector<Detection>& detections, FrameSize frame,
                                    const CurationConfig& config) {
  if (!frame.valid()) throw InvalidInput("frame size must be positive");
  std::vector<std::size_t> passing;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& box = detections[i].box;
    if (!box.valid()) continue;
    if (box.height() < config.min_height_frac * frame.height) continue;
    if (box.width() < config.min_width_frac * frame.width) continue;
    if (visible_fraction(box, frame) < config.min_visible_frac) continue;
    passing.push_back(i);
  }

  // Rank within each class; keep the top max_per_class.
  std::vector<std::size_t> ranked = passing;
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = detections[a];
    const auto& db = detections[b];
    return std::make_tuple(-da.confidence, -da.box.area(), da.box.x1) <
           std::make_tuple(-db.confidence, -db.box.area(), db.box.x1);
  });
  std::vector<bool> keep(detections.size(), false);
  int counts[3] = {0, 0, 0};
  for (std::size_t i : ranked) {
    int& count = counts[static_cast<int>(detections[i].object_class)];
    if (count < config.max_per_class) {
      ++count;
      keep[i] = true;
    }
  }

  std::vector<Detection> out;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (keep[i]) out.push_back(detections[i]);
  }
  return out;
}

std::vector<std::size_t> deduplicate_indices(const std::vector<ClassBox>& boxes, double dedup_iou) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].box.area() > boxes[b].box.area();
  });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return boxes[k].object_class == boxes[i].object_class && iou(boxes[k].box, boxes[i].box) > dedup_iou;
    });
    if (!duplicate) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<ClassBox> deduplicate_annotations(const std::vector<ClassBox>& boxes, double dedup_iou) {
  std::vector<ClassBox> out;
  for (std::size_t i : deduplicate_indices(boxes, dedup_iou)) out.push_back(boxes[i]);
  return out;
}

}  // namespace vruik
