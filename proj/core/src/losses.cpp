#include "pxa/losses.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

#include "pxa/error.hpp"

namespace pxa {

namespace {

// Picks the `hard` highest-loss members of `pool` (ties by ascending index),
// then `random` more uniformly from what is left. `pool` must be ascending.
std::vector<std::size_t> hard_then_random(const std::vector<std::size_t>& pool,
                                          const std::vector<double>& loss, std::size_t hard,
                                          std::size_t random, CounterRng& rng) {
    hard = std::min(hard, pool.size());
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto harder = [&](std::size_t a, std::size_t b) {
        if (loss[a] != loss[b]) return loss[a] > loss[b];
        return pool[a] < pool[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(hard), order.end(),
                      harder);

    std::vector<std::size_t> chosen;
    chosen.reserve(hard + random);
    for (std::size_t i = 0; i < hard; ++i) chosen.push_back(pool[order[i]]);
    std::sort(chosen.begin(), chosen.end());

    std::vector<std::size_t> rest;
    rest.reserve(pool.size() - hard);
    std::set_difference(pool.begin(), pool.end(), chosen.begin(), chosen.end(),
                        std::back_inserter(rest));
    random = std::min(random, rest.size());
    for (std::size_t i = 0; i < random; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(rest.size() - i));
        std::swap(rest[i], rest[j]);
        chosen.push_back(rest[i]);
    }
    return chosen;
}

struct BranchSum {
    double sum = 0.0;
    std::size_t positives = 0;
    std::size_t selected = 0;
};

BranchSum classification_sum(std::span<const float> scores, std::span<const Label> labels,
                             NegativeQuota quota, CounterRng& rng) {
    BranchSum out;
    for (std::size_t i : ohem_select(scores, labels, quota, rng)) {
        const bool pos = labels[i] == Label::Positive;
        out.sum += cross_entropy(scores[i], pos ? 1 : 0);
        out.positives += pos ? 1 : 0;
        ++out.selected;
    }
    return out;
}

double normalized(const BranchSum& b, bool by_selected) {
    const std::size_t denom = by_selected ? b.selected : b.positives;
    if (b.positives == 0 && !by_selected) return 0.0;
    return denom == 0 ? 0.0 : b.sum / static_cast<double>(denom);
}

}  // namespace

void LossWeights::validate() const {
    if (!(lambda_theta > 0.0 && alpha_p > 0.0 && alpha_a > 0.0 && alpha_all > 0.0)) {
        throw InvalidInput("loss weights must be positive");
    }
}

void OhemPolicy::validate() const {
    if (!(anchor_neg_pos_ratio >= 1.0)) {
        throw InvalidInput("anchor negative:positive ratio must be >= 1");
    }
}

double cross_entropy(double p, int y) {
    const double q = std::clamp(p, kProbEps, 1.0 - kProbEps);
    return y != 0 ? -std::log(q) : -std::log1p(-q);
}

std::vector<std::size_t> ohem_select(std::span<const float> scores, std::span<const Label> labels,
                                     NegativeQuota quota, CounterRng& rng) {
    if (scores.size() != labels.size()) {
        throw InvalidInput("ohem_select: scores and labels differ in length");
    }
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Label::Positive) positives.push_back(i);
        else if (labels[i] == Label::Negative) negatives.push_back(i);
    }
    std::vector<double> loss(negatives.size());
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        loss[k] = cross_entropy(scores[negatives[k]], 0);
    }
    std::vector<std::size_t> picked = hard_then_random(negatives, loss, quota.hard, quota.random, rng);
    picked.insert(picked.end(), positives.begin(), positives.end());
    std::sort(picked.begin(), picked.end());
    return picked;
}

double pixel_cls_loss(const Grid<float>& rbox_scores, const Grid<Label>& rbox_labels,
                      const Grid<float>& heat_scores, const Grid<Label>& heat_labels,
                      const OhemPolicy& policy, CounterRng& rng) {
    if (rbox_scores.rows() != rbox_labels.rows() || rbox_scores.cols() != rbox_labels.cols() ||
        heat_scores.rows() != heat_labels.rows() || heat_scores.cols() != heat_labels.cols()) {
        throw InvalidInput("pixel_cls_loss: score and label grids differ in shape");
    }
    const NegativeQuota quota{policy.pixel_hard_neg, policy.pixel_rand_neg};
    const BranchSum rbox = classification_sum(rbox_scores.values(), rbox_labels.values(), quota, rng);
    const BranchSum heat = classification_sum(heat_scores.values(), heat_labels.values(), quota, rng);
    return normalized(rbox, policy.normalize_by_selected) +
           normalized(heat, policy.normalize_by_selected);
}

double iou_loss(const RBoxPred& r, const RBoxPred& s) {
    if (r.d_top < 0 || r.d_bottom < 0 || r.d_left < 0 || r.d_right < 0 || s.d_top < 0 ||
        s.d_bottom < 0 || s.d_left < 0 || s.d_right < 0) {
        throw InvalidInput("iou_loss: distances must be non-negative");
    }
    const double area_r = (r.d_top + r.d_bottom) * (r.d_left + r.d_right);
    const double area_s = (s.d_top + s.d_bottom) * (s.d_left + s.d_right);
    const double w = std::min(r.d_left, s.d_left) + std::min(r.d_right, s.d_right);
    const double h = std::min(r.d_top, s.d_top) + std::min(r.d_bottom, s.d_bottom);
    const double inter = w * h;
    const double uni = area_r + area_s - inter;
    const double iou = uni > 0.0 ? inter / uni : 0.0;
    return -std::log(std::max(iou, kProbEps));
}

double angle_loss(double theta, double theta_star) { return 1.0 - std::cos(theta - theta_star); }

double pixel_loc_loss(std::span<const RBoxPred> preds, std::span<const RBoxPred> targets,
                      const OhemPolicy& policy, CounterRng& rng, const LossWeights& w) {
    if (preds.size() != targets.size()) {
        throw InvalidInput("pixel_loc_loss: predictions and targets differ in length");
    }
    if (preds.empty()) return 0.0;
    std::vector<double> loss(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        loss[i] = iou_loss(preds[i], targets[i]) +
                  w.lambda_theta * angle_loss(preds[i].theta, targets[i].theta);
    }
    std::vector<std::size_t> pool(preds.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    const auto chosen = hard_then_random(pool, loss, policy.pixel_loc_hard_pos,
                                         policy.pixel_loc_rand_pos, rng);
    if (chosen.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i : chosen) sum += loss[i];
    return sum / static_cast<double>(chosen.size());
}

double smooth_l1(double x) {
    const double a = std::abs(x);
    return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

AnchorLoss anchor_losses(std::span<const float> scores,
                         std::span<const std::array<float, 8>> offset_preds,
                         const AnchorTargets& targets, const OhemPolicy& policy) {
    if (scores.size() != targets.size() || offset_preds.size() != targets.size()) {
        throw InvalidInput("anchor_losses: prediction length does not match the anchor targets");
    }
    const std::size_t npos = targets.positives();
    if (npos == 0) return {};
    const auto hard = static_cast<std::size_t>(
        std::floor(policy.anchor_neg_pos_ratio * static_cast<double>(npos)));
    CounterRng idle(policy.rng_seed);  // random quota is zero; never drawn
    const BranchSum cls = classification_sum(scores, targets.labels, {hard, 0}, idle);

    double loc = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets.labels[i] != Label::Positive) continue;
        for (std::size_t k = 0; k < 8; ++k) {
            loc += smooth_l1(static_cast<double>(offset_preds[i][k]) - targets.offsets[i][k]);
        }
    }
    return {normalized(cls, policy.normalize_by_selected), loc / static_cast<double>(npos)};
}

double total_loss(const LossComponents& c, const LossWeights& w) {
    return w.alpha_all * (c.pixel_cls + w.alpha_p * c.pixel_loc) + (c.anchor_cls + w.alpha_a * c.anchor_loc);
}

LossReport compute_losses(const PixelTargets& pixel, const AnchorTargets& anchor,
                          const Predictions& pred, const OhemPolicy& policy, const LossWeights& w) {
    if (!pred.rbox_score.same_shape(pred.heatmap) || pred.rbox_score.rows() != pixel.score.rows() ||
        pred.rbox_score.cols() != pixel.score.cols()) {
        throw InvalidInput("pixel predictions do not match the target grid");
    }
    for (const auto& g : pred.rbox_geo) {
        if (!g.same_shape(pred.rbox_score)) throw InvalidInput("geometry prediction has the wrong shape");
    }

    CounterRng rng(policy.rng_seed);
    LossReport report;
    report.components.pixel_cls =
        pixel_cls_loss(pred.rbox_score, pixel.score, pred.heatmap, pixel.attention, policy, rng);

    std::vector<RBoxPred> preds;
    std::vector<RBoxPred> truth;
    for (std::size_t r = 0; r < pixel.score.rows(); ++r) {
        for (std::size_t c = 0; c < pixel.score.cols(); ++c) {
            if (pixel.score(r, c) != Label::Positive) continue;
            preds.push_back({pred.rbox_geo[0](r, c), pred.rbox_geo[1](r, c), pred.rbox_geo[2](r, c),
                             pred.rbox_geo[3](r, c), pred.rbox_geo[4](r, c)});
            truth.push_back(pixel.geo_at(r, c));
        }
    }
    report.components.pixel_loc = pixel_loc_loss(preds, truth, policy, rng, w);

    const AnchorLoss a = anchor_losses(pred.anchor_score, pred.anchor_offsets, anchor, policy);
    report.components.anchor_cls = a.cls;
    report.components.anchor_loc = a.loc;

    report.pixel_dt = report.components.pixel_cls + w.alpha_p * report.components.pixel_loc;
    report.anchor_dt = report.components.anchor_cls + w.alpha_a * report.components.anchor_loc;
    report.total = total_loss(report.components, w);
    return report;
}

}  // namespace pxa
