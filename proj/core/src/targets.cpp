#include "pxa/targets.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pxa/error.hpp"
#include "pxa/parallel.hpp"

namespace pxa {

namespace {

struct CellRange {
    std::size_t r0 = 0, r1 = 0, c0 = 0, c1 = 0;  // half-open
};

// Cells whose centres may fall inside the rectangle.
CellRange cells_covering(const AARect& box, double stride, std::size_t rows, std::size_t cols) {
    auto lo = [&](double v, std::size_t n) {
        const double k = std::floor(v / stride - 0.5);
        return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n)));
    };
    auto hi = [&](double v, std::size_t n) {
        const double k = std::ceil(v / stride - 0.5) + 1.0;
        return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n)));
    };
    return {lo(box.ymin, rows), hi(box.ymax, rows), lo(box.xmin, cols), hi(box.xmax, cols)};
}

Quad decode_corners(const Anchor& a, const std::array<double, 8>& off) {
    const AARect r = a.rect();
    const std::array<Point, 4> base = {Point{r.xmin, r.ymin}, Point{r.xmax, r.ymin},
                                       Point{r.xmax, r.ymax}, Point{r.xmin, r.ymax}};
    std::array<Point, 4> pts{};
    for (std::size_t k = 0; k < 4; ++k) {
        pts[k] = {base[k].x + off[2 * k] * a.w, base[k].y + off[2 * k + 1] * a.h};
    }
    try {
        return Quad(pts);
    } catch (const InvalidInput& e) {
        throw DegenerateResult(std::string("decoded offsets are degenerate: ") + e.what());
    }
}

double center_distance(const Anchor& a, const AARect& box) {
    return std::hypot(a.cx - 0.5 * (box.xmin + box.xmax), a.cy - 0.5 * (box.ymin + box.ymax));
}

}  // namespace

PixelTargets make_pixel_targets(const GroundTruth& gt, double grid_stride, double shrink_ratio) {
    if (!(grid_stride >= 1.0)) throw InvalidInput("grid stride must be >= 1");
    if (!(shrink_ratio >= 0.0 && shrink_ratio < 0.5)) {
        throw InvalidInput("shrink ratio must lie in [0, 0.5)");
    }
    const auto rows = static_cast<std::size_t>(std::ceil(static_cast<double>(gt.image_h) / grid_stride));
    const auto cols = static_cast<std::size_t>(std::ceil(static_cast<double>(gt.image_w) / grid_stride));

    PixelTargets t;
    t.stride = grid_stride;
    t.score = Grid<Label>(rows, cols, Label::Negative);
    t.attention = Grid<Label>(rows, cols, Label::Negative);
    t.owner = Grid<int>(rows, cols, -1);
    for (auto& g : t.geo) g = Grid<float>(rows, cols, 0.0f);

    // Pass 1: do-not-care regions dominate everything.
    std::vector<bool> blocked(rows * cols, false);
    for (const GroundTruthBox& box : gt.boxes) {
        if (box.care) continue;
        const CellRange cr = cells_covering(mbr(box.quad), grid_stride, rows, cols);
        for (std::size_t r = cr.r0; r < cr.r1; ++r) {
            for (std::size_t c = cr.c0; c < cr.c1; ++c) {
                if (box.quad.contains(cell_center(r, c, grid_stride))) {
                    blocked[r * cols + c] = true;
                    t.score(r, c) = Label::Ignored;
                    t.attention(r, c) = Label::Ignored;
                }
            }
        }
    }

    // Pass 2: positives from shrunk care quads, ignore band from the rest.
    for (std::size_t b = 0; b < gt.boxes.size(); ++b) {
        const GroundTruthBox& box = gt.boxes[b];
        if (!box.care) continue;
        std::optional<Quad> shrunk;
        try {
            shrunk = shrink_quad(box.quad, shrink_ratio);
        } catch (const DegenerateResult&) {
            // Too small to keep a positive core; the whole box becomes ignored.
        }
        const RotRect fitted = fit_rotated_rect(box.quad);
        const CellRange cr = cells_covering(mbr(box.quad), grid_stride, rows, cols);
        for (std::size_t r = cr.r0; r < cr.r1; ++r) {
            for (std::size_t c = cr.c0; c < cr.c1; ++c) {
                const Point p = cell_center(r, c, grid_stride);
                if (!box.quad.contains(p) || blocked[r * cols + c]) continue;
                if (t.attention(r, c) == Label::Negative) t.attention(r, c) = Label::Positive;
                if (t.score(r, c) == Label::Positive) continue;
                if (shrunk && shrunk->contains(p)) {
                    t.score(r, c) = Label::Positive;
                    t.owner(r, c) = static_cast<int>(b);
                    const RBoxPred g = rbox_from_rotrect(p.x, p.y, fitted);
                    t.geo[0](r, c) = static_cast<float>(std::max(0.0, g.d_top));
                    t.geo[1](r, c) = static_cast<float>(std::max(0.0, g.d_bottom));
                    t.geo[2](r, c) = static_cast<float>(std::max(0.0, g.d_left));
                    t.geo[3](r, c) = static_cast<float>(std::max(0.0, g.d_right));
                    t.geo[4](r, c) = static_cast<float>(g.theta);
                } else {
                    t.score(r, c) = Label::Ignored;
                }
            }
        }
    }
    return t;
}

std::size_t AnchorTargets::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Positive));
}

AnchorTargets match_anchors(const AnchorLattice& lattice, const GroundTruth& gt, double pos_iou) {
    if (lattice.empty()) throw InvalidInput("anchor lattice is empty");
    const std::size_t n = lattice.size();
    AnchorTargets t;
    t.labels.assign(n, Label::Negative);
    t.gt_index.assign(n, -1);
    t.best_iou.assign(n, 0.0);
    t.offsets.assign(n, std::array<float, 8>{});

    std::vector<AARect> boxes;
    boxes.reserve(gt.boxes.size());
    for (const GroundTruthBox& b : gt.boxes) boxes.push_back(mbr(b.quad));
    if (boxes.empty()) return t;

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const AARect ar = lattice.anchors[k].rect();
            double best = 0.0;
            int arg = -1;
            for (std::size_t g = 0; g < boxes.size(); ++g) {
                const double iou = aarect_iou(ar, boxes[g]);
                if (iou > best) {
                    best = iou;
                    arg = static_cast<int>(g);
                }
            }
            t.best_iou[k] = best;
            if (arg >= 0 && best > pos_iou) {
                t.gt_index[k] = arg;
                t.labels[k] = gt.boxes[static_cast<std::size_t>(arg)].care ? Label::Positive
                                                                           : Label::Ignored;
            }
        }
    });

    // Forced best match per care box; an anchor is claimed by at most one box.
    std::vector<bool> forced(n, false);
    for (std::size_t g = 0; g < boxes.size(); ++g) {
        if (!gt.boxes[g].care || !(gt.boxes[g].quad.area() > 0.0)) continue;
        std::size_t arg = n;
        double best_iou = -1.0;
        double best_dist = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (forced[k]) continue;
            const Anchor& a = lattice.anchors[k];
            const double iou = aarect_iou(a.rect(), boxes[g]);
            if (iou < best_iou) continue;
            const double dist = center_distance(a, boxes[g]);
            if (iou > best_iou || dist < best_dist) {
                best_iou = iou;
                best_dist = dist;
                arg = k;
            }
        }
        if (arg == n) continue;
        forced[arg] = true;
        t.labels[arg] = Label::Positive;
        t.gt_index[arg] = static_cast<int>(g);
        t.best_iou[arg] = best_iou;
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (t.labels[k] != Label::Positive) continue;
        const auto off = encode_offsets(lattice.anchors[k],
                                        gt.boxes[static_cast<std::size_t>(t.gt_index[k])].quad);
        for (std::size_t i = 0; i < 8; ++i) t.offsets[k][i] = static_cast<float>(off[i]);
    }
    return t;
}

std::array<double, 8> encode_offsets(const Anchor& a, const Quad& q) {
    const AARect r = a.rect();
    const std::array<Point, 4> base = {Point{r.xmin, r.ymin}, Point{r.xmax, r.ymin},
                                       Point{r.xmax, r.ymax}, Point{r.xmin, r.ymax}};
    std::array<double, 8> off{};
    for (std::size_t k = 0; k < 4; ++k) {
        off[2 * k] = (q[k].x - base[k].x) / a.w;
        off[2 * k + 1] = (q[k].y - base[k].y) / a.h;
    }
    return off;
}

Quad decode_offsets(const Anchor& a, std::span<const double, 8> offsets) {
    std::array<double, 8> off{};
    std::copy(offsets.begin(), offsets.end(), off.begin());
    return decode_corners(a, off);
}

Quad decode_offsets(const Anchor& a, std::span<const float, 8> offsets) {
    std::array<double, 8> off{};
    std::copy(offsets.begin(), offsets.end(), off.begin());
    return decode_corners(a, off);
}

}  // namespace pxa
