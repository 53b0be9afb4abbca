#pragma once

#include <vector>

#include "vruik/core.hpp"

namespace vruik {

struct Detection {
  ObjectClass object_class{ObjectClass::person};
  BoundingBox box;
  double confidence{1.0};
  int frame{0};

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct CurationConfig {
  double min_height_frac{0.08};
  double min_width_frac{0.01};
  double min_visible_frac{0.5};
  int max_per_class{3};
  double cyclist_pair_iou{0.3};
  double cyclist_max_vertical_offset_px{160.0};

  /// Throws InvalidInput on out-of-range settings.
  void validate() const;
};

struct CyclistAssociation {
  std::vector<Detection> cyclists;
  std::vector<Detection> remaining;
};

/// Merges (person, bicycle) pairs into cyclist detections.
///
/// A pair qualifies when iou > cyclist_pair_iou, the person's center lies
/// above the bicycle's center and the vertical center offset is at most
/// cyclist_max_vertical_offset_px. Qualifying pairs are accepted greedily by
/// descending iou (ties by person index, then bicycle index) so each input
/// joins at most one pair. The merged box is the union of the pair and the
/// merged confidence is the smaller of the two.
CyclistAssociation associate_cyclists(const std::vector<Detection>& detections,
                                      const CurationConfig& config = {});

/// Size, visibility and per-class cap filter for one frame. Survivors keep
/// their input order; the cap ranks by confidence, then area, then leftmost x1.
std::vector<Detection> filter_frame(const std::vector<Detection>& detections, FrameSize frame,
                                    const CurationConfig& config = {});

struct ClassBox {
  ObjectClass object_class{ObjectClass::person};
  BoundingBox box;

  friend bool operator==(const ClassBox&, const ClassBox&) = default;
};

/// Indices (into `boxes`) kept by deduplicate_annotations, ascending.
std::vector<std::size_t> deduplicate_indices(const std::vector<ClassBox>& boxes,
                                             double dedup_iou = 0.9);

/// Drops same-class boxes overlapping a larger kept box with iou > dedup_iou.
/// Ties in area go to the earlier entry. Output preserves input order.
std::vector<ClassBox> deduplicate_annotations(const std::vector<ClassBox>& boxes,
                                              double dedup_iou = 0.9);

}  // namespace vruik
