#pragma once

#include <string>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/datasetio.hpp"

namespace vruik::cli {

/// Track trajectories (center polylines, final box) drawn over the frame,
/// with the sample's annotation boxes and their intent labels on top.
std::string render_svg(const std::vector<Track>& tracks, const SceneAnnotation* sample, FrameSize frame,
                       double scale = 0.5);

}  // namespace vruik::cli
