#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pxa/geometry.hpp"
#include "pxa/grid.hpp"
#include "pxa/rng.hpp"
#include "pxa/targets.hpp"

namespace pxa {

struct LossWeights {
    double lambda_theta = 10.0;
    double alpha_p = 1.0;
    double alpha_a = 0.2;
    double alpha_all = 3.0;

    void validate() const;
};

struct OhemPolicy {
    std::size_t pixel_hard_neg = 512;
    std::size_t pixel_rand_neg = 512;
    std::size_t pixel_loc_hard_pos = 128;
    std::size_t pixel_loc_rand_pos = 128;
    double anchor_neg_pos_ratio = 3.0;
    std::uint64_t rng_seed = 0;
    /// Divide classification sums by the selected-set size instead of the
    /// positive count.
    bool normalize_by_selected = false;

    void validate() const;
};

/// Probabilities are clamped to [kProbEps, 1 - kProbEps] before taking logs.
inline constexpr double kProbEps = 1e-7;

double cross_entropy(double p, int y);

/// Negatives to draw in addition to all positives.
struct NegativeQuota {
    std::size_t hard = 0;
    std::size_t random = 0;
};

/// OHEM selection, returned as ascending indices.
///
/// Keeps every positive, then the `hard` negatives with the highest
/// cross-entropy (ties by ascending index), then `random` negatives drawn
/// uniformly without replacement from the remaining negatives in index order.
/// Ignored elements are never selected.
std::vector<std::size_t> ohem_select(std::span<const float> scores, std::span<const Label> labels,
                                     NegativeQuota quota, CounterRng& rng);

/// Two-branch pixel classification loss. Each branch draws its own OHEM
/// sample from `rng`, RBox branch first.
double pixel_cls_loss(const Grid<float>& rbox_scores, const Grid<Label>& rbox_labels,
                      const Grid<float>& heat_scores, const Grid<Label>& heat_labels,
                      const OhemPolicy& policy, CounterRng& rng);

double iou_loss(const RBoxPred& r, const RBoxPred& r_star);
double angle_loss(double theta, double theta_star);

/// Regression loss over positive cells; preds and targets are aligned lists of
/// the positive cells only.
double pixel_loc_loss(std::span<const RBoxPred> preds, std::span<const RBoxPred> targets,
                      const OhemPolicy& policy, CounterRng& rng, const LossWeights& w);

double smooth_l1(double x);

struct AnchorLoss {
    double cls = 0.0;
    double loc = 0.0;
};

/// Anchor classification (positives plus ratio x hardest negatives) and
/// smooth-L1 offset regression, both normalized by the positive count.
AnchorLoss anchor_losses(std::span<const float> scores,
                         std::span<const std::array<float, 8>> offset_preds,
                         const AnchorTargets& targets, const OhemPolicy& policy);

struct LossComponents {
    double pixel_cls = 0.0;
    double pixel_loc = 0.0;
    double anchor_cls = 0.0;
    double anchor_loc = 0.0;
};

double total_loss(const LossComponents& c, const LossWeights& w);

/// Every loss term for one image.
struct LossReport {
    LossComponents components;
    double pixel_dt = 0.0;
    double anchor_dt = 0.0;
    double total = 0.0;
};

/// Prediction tensors for one image, aligned with the target grids and the
/// full anchor lattice.
struct Predictions {
    Grid<float> rbox_score;
    std::array<Grid<float>, 5> rbox_geo;
    Grid<float> heatmap;
    std::vector<float> anchor_score;
    std::vector<std::array<float, 8>> anchor_offsets;
};

LossReport compute_losses(const PixelTargets& pixel, const AnchorTargets& anchor,
                          const Predictions& pred, const OhemPolicy& policy, const LossWeights& w);

}  // namespace pxa
