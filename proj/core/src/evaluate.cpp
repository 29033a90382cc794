#include "pxa/evaluate.hpp"

#include <algorithm>
#include <numeric>

namespace pxa {

void finalize(Metrics& m) {
    m.precision = m.counted_detections > 0
                      ? static_cast<double>(m.true_positives) / static_cast<double>(m.counted_detections)
                      : 0.0;
    m.recall = m.care_gt > 0 ? static_cast<double>(m.true_positives) / static_cast<double>(m.care_gt) : 0.0;
    const double sum = m.precision + m.recall;
    m.f_measure = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
}

Metrics evaluate(std::span<const Detection> dets, const GroundTruth& gt, double iou_thresh) {
    Metrics m;
    for (const GroundTruthBox& b : gt.boxes) m.care_gt += b.care ? 1 : 0;

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::vector<bool> claimed(gt.boxes.size(), false);
    for (std::size_t d : order) {
        double best = -1.0;
        std::size_t arg = gt.boxes.size();
        bool hits_dont_care = false;
        for (std::size_t g = 0; g < gt.boxes.size(); ++g) {
            const double iou = quad_iou(dets[d].quad, gt.boxes[g].quad);
            if (!gt.boxes[g].care) {
                hits_dont_care = hits_dont_care || iou >= iou_thresh;
                continue;
            }
            if (!claimed[g] && iou >= iou_thresh && iou > best) {
                best = iou;
                arg = g;
            }
        }
        if (arg < gt.boxes.size()) {
            claimed[arg] = true;
            ++m.true_positives;
            ++m.counted_detections;
            m.matches.push_back({d, arg, best});
        } else if (hits_dont_care) {
            ++m.ignored_detections;
        } else {
            ++m.counted_detections;
        }
    }
    finalize(m);
    return m;
}

Metrics accumulate(std::span<const Metrics> per_image) {
    Metrics total;
    for (const Metrics& m : per_image) {
        total.true_positives += m.true_positives;
        total.counted_detections += m.counted_detections;
        total.care_gt += m.care_gt;
        total.ignored_detections += m.ignored_detections;
    }
    finalize(total);
    return total;
}

}  // namespace pxa
