#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "pxa/anchors.hpp"
#include "pxa/geometry.hpp"
#include "pxa/grid.hpp"

namespace pxa {

enum class Source : unsigned char { Pixel, Anchor };

std::string_view to_string(Source s);

struct Detection {
    Quad quad;
    double score = 0.0;
    Source source = Source::Pixel;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct FusionConfig {
    double pixel_score_thresh = 0.8;
    double anchor_score_thresh = 0.5;
    double min_mbr_side = 10.0;
    double min_mbr_ratio = 1.0 / 15.0;
    double max_mbr_ratio = 15.0;
    double mbr_nms_iou = 0.5;
    double quad_nms_iou = 0.2;
    double anchor_score_boost = 1.0;
    /// Run the MBR stage before quad NMS; off gives single-stage quad NMS.
    bool cascade = true;

    void validate() const;
};

/// Stage counters filled in by the decode and NMS steps.
struct FusionDiagnostics {
    std::size_t pixel_candidates = 0;
    std::size_t pixel_degenerate = 0;
    std::size_t pixel_after_filter = 0;
    std::size_t anchor_candidates = 0;
    std::size_t anchor_degenerate = 0;
    std::size_t fused = 0;
    std::size_t after_mbr_nms = 0;
    std::size_t after_quad_nms = 0;
    std::size_t mbr_iou_evals = 0;
    std::size_t quad_iou_evals = 0;
};

/// exp(p) element-wise; throws InvalidInput for values outside [0, 1].
Grid<float> attention_multiplier(const Grid<float>& heat);

/// One rotated box per cell whose score reaches pixel_score_thresh. Cells
/// whose geometry does not decode to a valid quad are dropped and counted.
std::vector<Detection> decode_pixel(const Grid<float>& score, const std::array<Grid<float>, 5>& geo,
                                    double stride, const FusionConfig& cfg,
                                    FusionDiagnostics* diag = nullptr);

/// Drops pixel boxes whose MBR short side is below min_mbr_side or whose MBR
/// width/height ratio falls outside [min_mbr_ratio, max_mbr_ratio]. Anchor
/// boxes pass through.
std::vector<Detection> filter_pixel(std::span<const Detection> dets, const FusionConfig& cfg);

/// Decodes anchors whose score reaches anchor_score_thresh. Tensors are
/// aligned with `lattice` (one score and 8 offsets per anchor).
std::vector<Detection> decode_anchor(const AnchorLattice& lattice, std::span<const float> scores,
                                     std::span<const std::array<float, 8>> offsets,
                                     const FusionConfig& cfg, FusionDiagnostics* diag = nullptr);

/// Adds anchor_score_boost to anchor-sourced scores.
std::vector<Detection> fuse_scores(std::span<const Detection> dets, const FusionConfig& cfg);

/// Greedy NMS on MBR IoU (> mbr_nms_iou suppresses), then greedy NMS on quad
/// IoU (> quad_nms_iou suppresses) over the survivors. Candidates are ranked
/// by score, anchor source first on ties, then input order; the result keeps
/// that ranking.
std::vector<Detection> cascaded_nms(std::span<const Detection> dets, const FusionConfig& cfg,
                                    FusionDiagnostics* diag = nullptr);

struct PixelOutputs {
    Grid<float> score;
    std::array<Grid<float>, 5> geo;
    double stride = 4.0;
};

struct AnchorOutputs {
    std::vector<float> score;
    std::vector<std::array<float, 8>> offsets;
};

struct FusionResult {
    std::vector<Detection> detections;
    FusionDiagnostics diagnostics;
};

/// Full inference post-processing. `anchors` is aligned with the untrimmed
/// `lattice`; trimming and tensor lookup happen here.
FusionResult fusion_nms_pipeline(const PixelOutputs& pixel, const AnchorOutputs& anchors,
                                 const AnchorLattice& lattice, const FusionConfig& cfg);

}  // namespace pxa
