#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pxa/postprocess.hpp"
#include "pxa/targets.hpp"

namespace pxa {

struct Match {
    std::size_t detection = 0;  // index into the input detections
    std::size_t gt = 0;         // index into the ground-truth boxes
    double iou = 0.0;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    std::size_t true_positives = 0;
    std::size_t counted_detections = 0;
    std::size_t care_gt = 0;
    std::size_t ignored_detections = 0;  // matched only a do-not-care region
    std::vector<Match> matches;
};

/// Fills precision, recall and F from the counters; each is 0 when undefined.
void finalize(Metrics& m);

/// Greedy one-to-one matching by quad IoU.
///
/// Detections are visited by descending score (input order on ties); each one
/// claims the unclaimed care box with the highest IoU if that IoU reaches
/// iou_thresh. An unmatched detection overlapping a do-not-care box by at least
/// iou_thresh is left out of the precision denominator.
Metrics evaluate(std::span<const Detection> dets, const GroundTruth& gt, double iou_thresh = 0.5);

/// Pools counters over several images (match lists are not merged).
Metrics accumulate(std::span<const Metrics> per_image);

}  // namespace pxa
