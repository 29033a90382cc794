#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "pxa/postprocess.hpp"
#include "pxa/targets.hpp"

namespace pxa {

/// SVG 1.1 overlay: care ground truth in dashed green, do-not-care in dashed
/// grey, pixel detections in blue and anchor detections in red.
std::string render_svg(std::span<const Detection> dets, const GroundTruth* gt, std::size_t width,
                       std::size_t height);

}  // namespace pxa
