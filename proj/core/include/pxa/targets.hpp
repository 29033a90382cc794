#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pxa/anchors.hpp"
#include "pxa/geometry.hpp"
#include "pxa/grid.hpp"

namespace pxa {

struct GroundTruthBox {
    Quad quad;
    bool care = true;  // false for "###" (do-not-care) regions
    std::string text;
};

struct GroundTruth {
    std::vector<GroundTruthBox> boxes;
    std::size_t image_w = 0;
    std::size_t image_h = 0;
};

/// Ground truth for the pixel branch on a grid of the given stride.
///
/// Geometry channels are valid on positive cells only and hold distances to
/// the edges of the fitted rotated rectangle of the owning box.
struct PixelTargets {
    double stride = 4.0;
    Grid<Label> score;
    std::array<Grid<float>, 5> geo;  // d_top, d_bottom, d_left, d_right, theta
    Grid<Label> attention;
    Grid<int> owner;  // box index of positive cells, -1 elsewhere

    RBoxPred geo_at(std::size_t r, std::size_t c) const {
        return {geo[0](r, c), geo[1](r, c), geo[2](r, c), geo[3](r, c), geo[4](r, c)};
    }
};

/// Cell (row, col) covers [col*s, (col+1)*s) x [row*s, (row+1)*s); its centre
/// is the sample point.
inline Point cell_center(std::size_t r, std::size_t c, double stride) {
    return {(static_cast<double>(c) + 0.5) * stride, (static_cast<double>(r) + 0.5) * stride};
}

/// Rasterizes score, geometry and attention targets.
///
/// Precedence per cell: inside any do-not-care box -> Ignored; inside the
/// shrunk quad of a care box -> Positive (first box wins); inside an unshrunk
/// care box only -> Ignored; otherwise Negative. The attention map uses the
/// unshrunk care quads and marks do-not-care regions Ignored.
PixelTargets make_pixel_targets(const GroundTruth& gt, double grid_stride, double shrink_ratio);

struct AnchorTargets {
    std::vector<Label> labels;
    std::vector<int> gt_index;  // matched box for positives and ignored anchors, else -1
    std::vector<double> best_iou;
    std::vector<std::array<float, 8>> offsets;  // zero for non-positives

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t positives() const;
};

/// Assigns anchors to ground truth through the axis-aligned MBR of each box.
///
/// An anchor is positive when its best IoU exceeds pos_iou with a care box and
/// ignored when that best box is do-not-care. Each care box additionally forces
/// its best remaining anchor positive (highest IoU, then nearest centre, then
/// lowest index), processed in box order.
AnchorTargets match_anchors(const AnchorLattice& lattice, const GroundTruth& gt,
                            double pos_iou = 0.5);

/// Corner offsets of q relative to the anchor rectangle, normalized by the
/// anchor width (x) and height (y). Corners pair in canonical order.
std::array<double, 8> encode_offsets(const Anchor& a, const Quad& q);

/// Inverse of encode_offsets. Throws DegenerateResult when the corners do not
/// form a valid convex quad.
Quad decode_offsets(const Anchor& a, std::span<const double, 8> offsets);
Quad decode_offsets(const Anchor& a, std::span<const float, 8> offsets);

}  // namespace pxa
