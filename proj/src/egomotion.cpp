#include "vruik/egomotion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <tuple>

#include "vruik/error.hpp"

namespace vruik {

FlowField::FlowField(int width, int height, FlowVector fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidInput("flow dimensions must be non-negative");
  vectors_.assign(std::size_t(width) * std::size_t(height), fill);
}

FlowField::FlowField(int width, int height, std::vector<FlowVector> vectors)
    : width_(width), height_(height), vectors_(std::move(vectors)) {
  if (width < 0 || height < 0) throw InvalidInput("flow dimensions must be non-negative");
  if (vectors_.size() != std::size_t(width) * std::size_t(height))
    throw InvalidInput("flow raster size does not match width * height");
  for (const auto& v : vectors_) {
    if (!std::isfinite(v.dx) || !std::isfinite(v.dy)) throw InvalidInput("flow vectors must be finite");
  }
}

FlowRegion adjacent_region(const BoundingBox& object_box, FrameSize frame, double margin_frac) {
  require_valid(object_box);
  if (!frame.valid()) throw InvalidInput("frame size must be positive");
  const double margin = margin_frac * std::max(object_box.width(), object_box.height());
  const BoundingBox& b = object_box;
  const double ox1 = b.x1 - margin, oy1 = b.y1 - margin, ox2 = b.x2 + margin, oy2 = b.y2 + margin;

  const BoundingBox strips[] = {
      {ox1, oy1, ox2, b.y1},   // top
      {ox1, b.y2, ox2, oy2},   // bottom
      {ox1, b.y1, b.x1, b.y2}, // left
      {b.x2, b.y1, ox2, b.y2}, // right
  };
  FlowRegion region;
  for (const auto& s : strips) {
    const BoundingBox clipped = clip_to_frame(s, frame);
    if (clipped.valid()) region.rects.push_back(clipped);
  }
  if (region.rects.empty()) throw DegenerateRegion("no in-frame area adjacent to the object");
  return region;
}

namespace {

// Pixels whose centers fall in [lo, hi), clamped to [0, limit).
std::pair<int, int> pixel_span(double lo, double hi, int limit) {
  const int first = std::max(0, static_cast<int>(std::ceil(lo - 0.5)));
  const int last = std::min(limit, static_cast<int>(std::ceil(hi - 0.5)));
  return {first, last};
}

double median_of(std::vector<double>& values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + std::ptrdiff_t(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + std::ptrdiff_t(mid));
  return (lower + upper) / 2.0;
}

}  // namespace

CameraDisplacement camera_displacement(const FlowField& flow, const FlowRegion& region,
                                       FlowAggregator aggregator) {
  std::vector<double> xs, ys;
  for (const auto& rect : region.rects) {
    const auto [x0, x1] = pixel_span(rect.x1, rect.x2, flow.width());
    const auto [y0, y1] = pixel_span(rect.y1, rect.y2, flow.height());
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const auto& v = flow.at(x, y);
        xs.push_back(v.dx);
        ys.push_back(v.dy);
      }
    }
  }
  if (xs.empty()) throw DegenerateRegion("flow region contains no pixels");

  if (aggregator == FlowAggregator::mean) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
    }
    return {sx / double(xs.size()), sy / double(ys.size())};
  }
  return {median_of(xs), median_of(ys)};
}

FlowField estimate_flow_block_matching(const GrayImage& frame_a, const GrayImage& frame_b, int block,
                                       int search_radius) {
  if (frame_a.width != frame_b.width || frame_a.height != frame_b.height)
    throw InvalidInput("frames differ in size");
  if (block < 1 || search_radius < 0) throw InvalidInput("block must be >= 1 and radius >= 0");
  if (frame_a.width < block || frame_a.height < block)
    throw InvalidInput("frames are smaller than one block");
  const int w = frame_a.width;
  const int h = frame_a.height;
  if (frame_a.pixels.size() != std::size_t(w) * h || frame_b.pixels.size() != std::size_t(w) * h)
    throw InvalidInput("pixel buffer does not match frame size");

  FlowField flow(w, h);
  for (int by = 0; by < h; by += block) {
    const int bh = std::min(block, h - by);
    for (int bx = 0; bx < w; bx += block) {
      const int bw = std::min(block, w - bx);
      long best_sad = std::numeric_limits<long>::max();
      int best_dx = 0, best_dy = 0;
      for (int dy = -search_radius; dy <= search_radius; ++dy) {
        if (by + dy < 0 || by + dy + bh > h) continue;
        for (int dx = -search_radius; dx <= search_radius; ++dx) {
          if (bx + dx < 0 || bx + dx + bw > w) continue;
          long sad = 0;
          for (int y = 0; y < bh && sad <= best_sad; ++y) {
            const std::uint8_t* ra = &frame_a.pixels[std::size_t(by + y) * w + bx];
            const std::uint8_t* rb = &frame_b.pixels[std::size_t(by + y + dy) * w + bx + dx];
            for (int x = 0; x < bw; ++x) sad += std::abs(int(ra[x]) - int(rb[x]));
          }
          const auto key = std::make_tuple(sad, dx * dx + dy * dy, dx, dy);
          if (key < std::make_tuple(best_sad, best_dx * best_dx + best_dy * best_dy, best_dx, best_dy)) {
            best_sad = sad;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      const FlowVector v{float(best_dx), float(best_dy)};
      for (int y = by; y < by + bh; ++y)
        for (int x = bx; x < bx + bw; ++x) flow.at(x, y) = v;
    }
  }
  return flow;
}

Point2 road_relative_displacement(Point2 object_disp, CameraDisplacement camera_disp) noexcept {
  return {object_disp.x - camera_disp.dx, object_disp.y - camera_disp.dy};
}

}  // namespace vruik
