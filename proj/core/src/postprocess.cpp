#include "pxa/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pxa/error.hpp"
#include "pxa/parallel.hpp"
#include "pxa/targets.hpp"

namespace pxa {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// Greedy suppression of `order` (already ranked). `overlap(kept, cand)` returns
// the IoU or a negative value when the pair is skipped without evaluation.
template <typename Overlap>
std::vector<std::size_t> greedy(const std::vector<std::size_t>& order, double thresh, Overlap overlap) {
    std::vector<std::size_t> kept;
    for (std::size_t cand : order) {
        bool suppressed = false;
        for (std::size_t k : kept) {
            if (overlap(k, cand) > thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

bool mbr_overlap(const AARect& a, const AARect& b) {
    return std::min(a.xmax, b.xmax) > std::max(a.xmin, b.xmin) &&
           std::min(a.ymax, b.ymax) > std::max(a.ymin, b.ymin);
}

}  // namespace

std::string_view to_string(Source s) { return s == Source::Anchor ? "anchor" : "pixel"; }

void FusionConfig::validate() const {
    if (!in_unit(pixel_score_thresh) || !in_unit(anchor_score_thresh) || !in_unit(mbr_nms_iou) ||
        !in_unit(quad_nms_iou)) {
        throw InvalidInput("fusion thresholds must lie in [0, 1]");
    }
    if (!(anchor_score_boost >= 0.0)) throw InvalidInput("anchor score boost must be >= 0");
    if (!(min_mbr_side >= 0.0)) throw InvalidInput("minimum MBR side must be >= 0");
    if (!(min_mbr_ratio > 0.0 && min_mbr_ratio <= max_mbr_ratio)) {
        throw InvalidInput("MBR ratio range must be positive and ordered");
    }
}

Grid<float> attention_multiplier(const Grid<float>& heat) {
    Grid<float> out(heat.rows(), heat.cols());
    auto src = heat.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (!in_unit(src[i])) throw InvalidInput("attention heat map value outside [0, 1]");
        dst[i] = std::exp(src[i]);
    }
    return out;
}

std::vector<Detection> decode_pixel(const Grid<float>& score, const std::array<Grid<float>, 5>& geo,
                                    double stride, const FusionConfig& cfg, FusionDiagnostics* diag) {
    for (const auto& g : geo) {
        if (!g.same_shape(score)) throw InvalidInput("geometry maps must match the score map shape");
    }
    if (!(stride > 0.0)) throw InvalidInput("pixel stride must be positive");

    std::vector<std::vector<Detection>> rows(score.rows());
    std::vector<std::size_t> dropped(score.rows(), 0);
    parallel_for(score.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            for (std::size_t c = 0; c < score.cols(); ++c) {
                const double s = score(r, c);
                if (!(s >= cfg.pixel_score_thresh)) continue;
                const Point p = cell_center(r, c, stride);
                const RBoxPred box{geo[0](r, c), geo[1](r, c), geo[2](r, c), geo[3](r, c), geo[4](r, c)};
                try {
                    rows[r].push_back({rbox_to_quad(p.x, p.y, box), s, Source::Pixel});
                } catch (const Error&) {
                    ++dropped[r];
                }
            }
        }
    }, 16);

    std::vector<Detection> out;
    for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
    if (diag) {
        diag->pixel_candidates += out.size();
        diag->pixel_degenerate += std::accumulate(dropped.begin(), dropped.end(), std::size_t{0});
    }
    return out;
}

std::vector<Detection> filter_pixel(std::span<const Detection> dets, const FusionConfig& cfg) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (const Detection& d : dets) {
        if (d.source == Source::Pixel) {
            const AARect r = mbr(d.quad);
            const double w = r.width();
            const double h = r.height();
            if (std::min(w, h) < cfg.min_mbr_side) continue;
            const double ratio = w / h;
            if (ratio < cfg.min_mbr_ratio || ratio > cfg.max_mbr_ratio) continue;
        }
        out.push_back(d);
    }
    return out;
}

std::vector<Detection> decode_anchor(const AnchorLattice& lattice, std::span<const float> scores,
                                     std::span<const std::array<float, 8>> offsets,
                                     const FusionConfig& cfg, FusionDiagnostics* diag) {
    if (scores.size() != lattice.size() || offsets.size() != lattice.size()) {
        throw InvalidInput("anchor tensors are not aligned with the lattice");
    }
    std::vector<Detection> out;
    std::size_t dropped = 0;
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        if (!(scores[k] >= cfg.anchor_score_thresh)) continue;
        try {
            out.push_back({decode_offsets(lattice.anchors[k], std::span<const float, 8>(offsets[k])),
                           scores[k], Source::Anchor});
        } catch (const Error&) {
            ++dropped;
        }
    }
    if (diag) {
        diag->anchor_candidates += out.size();
        diag->anchor_degenerate += dropped;
    }
    return out;
}

std::vector<Detection> fuse_scores(std::span<const Detection> dets, const FusionConfig& cfg) {
    std::vector<Detection> out(dets.begin(), dets.end());
    for (Detection& d : out) {
        if (d.source == Source::Anchor) d.score += cfg.anchor_score_boost;
    }
    return out;
}

std::vector<Detection> cascaded_nms(std::span<const Detection> dets, const FusionConfig& cfg,
                                    FusionDiagnostics* diag) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
        return dets[a].source == Source::Anchor && dets[b].source != Source::Anchor;
    });

    std::vector<AARect> boxes(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) boxes[i] = mbr(dets[i].quad);

    std::size_t mbr_evals = 0;
    std::size_t quad_evals = 0;
    std::vector<std::size_t> survivors = order;
    if (cfg.cascade) {
        survivors = greedy(order, cfg.mbr_nms_iou, [&](std::size_t k, std::size_t c) {
            ++mbr_evals;
            return aarect_iou(boxes[k], boxes[c]);
        });
    }
    const std::size_t after_mbr = survivors.size();
    survivors = greedy(survivors, cfg.quad_nms_iou, [&](std::size_t k, std::size_t c) {
        if (!mbr_overlap(boxes[k], boxes[c])) return 0.0;
        ++quad_evals;
        return quad_iou(dets[k].quad, dets[c].quad);
    });

    if (diag) {
        diag->after_mbr_nms = after_mbr;
        diag->after_quad_nms = survivors.size();
        diag->mbr_iou_evals += mbr_evals;
        diag->quad_iou_evals += quad_evals;
    }
    std::vector<Detection> out;
    out.reserve(survivors.size());
    for (std::size_t i : survivors) out.push_back(dets[i]);
    return out;
}

FusionResult fusion_nms_pipeline(const PixelOutputs& pixel, const AnchorOutputs& anchors,
                                 const AnchorLattice& lattice, const FusionConfig& cfg) {
    cfg.validate();
    FusionResult result;
    FusionDiagnostics& diag = result.diagnostics;

    std::vector<Detection> candidates;
    if (!pixel.score.empty()) {
        const auto decoded = decode_pixel(pixel.score, pixel.geo, pixel.stride, cfg, &diag);
        candidates = filter_pixel(decoded, cfg);
        diag.pixel_after_filter = candidates.size();
    }

    if (!lattice.empty() || !anchors.score.empty()) {
        std::size_t expected = 0;
        for (std::size_t n : count_anchors(lattice.config, lattice.input_w, lattice.input_h)) expected += n;
        if (anchors.score.size() != expected || anchors.offsets.size() != expected) {
            throw InvalidInput("anchor tensors must cover the untrimmed lattice (" +
                               std::to_string(expected) + " anchors)");
        }
        const AnchorLattice trimmed = trim_for_inference(lattice);
        std::vector<float> scores(trimmed.size());
        std::vector<std::array<float, 8>> offsets(trimmed.size());
        for (std::size_t k = 0; k < trimmed.size(); ++k) {
            scores[k] = anchors.score[trimmed.source_index[k]];
            offsets[k] = anchors.offsets[trimmed.source_index[k]];
        }
        const auto decoded = decode_anchor(trimmed, scores, offsets, cfg, &diag);
        candidates.insert(candidates.end(), decoded.begin(), decoded.end());
    }

    const auto fused = fuse_scores(candidates, cfg);
    diag.fused = fused.size();
    result.detections = cascaded_nms(fused, cfg, &diag);
    return result;
}

}  // namespace pxa
