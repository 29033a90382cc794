#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "pxa/anchors.hpp"
#include "pxa/losses.hpp"
#include "pxa/postprocess.hpp"

namespace pxa {

/// Every tunable of the pipeline, defaulting to the published settings.
struct RunConfig {
    std::size_t input_w = 640;
    std::size_t input_h = 640;
    double pixel_stride = 4.0;
    double shrink_ratio = 0.3;
    double pos_iou = 0.5;
    double eval_iou = 0.5;
    APLConfig anchors = APLConfig::defaults();
    FusionConfig fusion;
    LossWeights weights;
    OhemPolicy ohem;

    /// Throws InvalidInput on the first violated constraint.
    void validate() const;
};

/// Reads a JSON document whose keys override the defaults. Unknown keys and
/// type mismatches raise FormatError; range violations raise InvalidInput.
///
///   {
///     "input_size": {"width": 640, "height": 640},
///     "pixel": {"stride": 4, "shrink_ratio": 0.3},
///     "anchors": {"pos_iou": 0.5,
///                 "ratios": {"square": [1], "medium_horizontal": [2, 3, 5, 7], ...},
///                 "maps": [{"stride": 4, "base_scale": 6, "density": 1, ...}, ...]},
///     "fusion": {"pixel_score_thresh": 0.8, ...},
///     "loss_weights": {"lambda_theta": 10, ...},
///     "ohem": {"pixel_hard_neg": 512, ..., "seed": 0},
///     "eval": {"iou": 0.5}
///   }
///
/// "maps", when present, must list all six feature maps; each entry may be partial.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Full document with every field spelled out; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& cfg);

}  // namespace pxa
