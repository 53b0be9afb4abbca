#pragma once

#include <cstdint>
#include <vector>

#include "vruik/core.hpp"

namespace vruik {

struct FlowVector {
  float dx{0.0f};
  float dy{0.0f};

  friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

/// Dense displacement raster from frame t to frame t+1, row-major.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height, FlowVector fill = {});
  FlowField(int width, int height, std::vector<FlowVector> vectors);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<FlowVector>& vectors() const noexcept { return vectors_; }

  const FlowVector& at(int x, int y) const { return vectors_[std::size_t(y) * width_ + x]; }
  FlowVector& at(int x, int y) { return vectors_[std::size_t(y) * width_ + x]; }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  int width_{0};
  int height_{0};
  std::vector<FlowVector> vectors_;
};

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Rectangles around an object whose pixels sample the background motion.
struct FlowRegion {
  std::vector<BoundingBox> rects;
};

struct CameraDisplacement {
  double dx{0.0};
  double dy{0.0};

  friend bool operator==(const CameraDisplacement&, const CameraDisplacement&) = default;
};

enum class FlowAggregator { median, mean };

/// Ring around `object_box` of thickness margin_frac * max(width, height),
/// split into top, bottom, left and right strips, each clipped to the frame.
/// Throws DegenerateRegion when no strip keeps positive area.
FlowRegion adjacent_region(const BoundingBox& object_box, FrameSize frame, double margin_frac = 0.5);

/// Component-wise median (or mean) of the flow over every pixel whose center
/// lies inside one of the region's rects. Throws DegenerateRegion when the
/// region covers no pixel of the raster.
CameraDisplacement camera_displacement(const FlowField& flow, const FlowRegion& region,
                                       FlowAggregator aggregator = FlowAggregator::median);

/// SAD block matching from frame_a to frame_b. Each block's integer
/// displacement is broadcast to its pixels; candidates that leave frame_b
/// are skipped; ties go to the smaller magnitude, then smaller (dx, dy).
FlowField estimate_flow_block_matching(const GrayImage& frame_a, const GrayImage& frame_b,
                                       int block = 16, int search_radius = 12);

Point2 road_relative_displacement(Point2 object_disp, CameraDisplacement camera_disp) noexcept;

}  // namespace vruik
