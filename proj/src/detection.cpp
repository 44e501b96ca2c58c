#include "ctxval/detection.hpp"

#include <algorithm>
#include <numeric>

namespace ctxval {

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

MatchAssignment match_predictions(const ImageRecord& img, double confidence_floor) {
    const auto& gt = img.ground_truth;
    const auto& preds = img.predictions;

    MatchAssignment m;
    m.object_ids.reserve(gt.size());
    for (const auto& g : gt) m.object_ids.push_back(g.object_id);
    m.prediction_of.assign(gt.size(), std::nullopt);
    m.iou.assign(gt.size(), 0.0);

    std::vector<std::size_t> order;
    std::vector<double> best_iou(preds.size(), 0.0);
    for (std::size_t p = 0; p < preds.size(); ++p) {
        if (preds[p].confidence < confidence_floor) continue;
        order.push_back(p);
        for (const auto& g : gt)
            if (g.class_id == preds[p].class_id)
                best_iou[p] = std::max(best_iou[p], box_iou(g.box, preds[p].box));
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (preds[x].confidence != preds[y].confidence) return preds[x].confidence > preds[y].confidence;
        if (best_iou[x] != best_iou[y]) return best_iou[x] > best_iou[y];
        return x < y;
    });

    for (std::size_t p : order) {
        std::optional<std::size_t> target;
        double target_iou = 0.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (m.prediction_of[g] || gt[g].class_id != preds[p].class_id) continue;
            const double iou = box_iou(gt[g].box, preds[p].box);
            if (iou > target_iou) {
                target = g;
                target_iou = iou;
            }
        }
        if (target) {
            m.prediction_of[*target] = p;
            m.iou[*target] = target_iou;
        } else {
            m.unmatched_prediction_indices.push_back(p);
        }
    }
    std::sort(m.unmatched_prediction_indices.begin(), m.unmatched_prediction_indices.end());
    return m;
}

PerformanceTable object_performance(const Dataset& d, double confidence_floor) {
    PerformanceTable table;
    for (const auto& img : d.images) {
        const MatchAssignment m = match_predictions(img, confidence_floor);
        for (std::size_t g = 0; g < m.object_ids.size(); ++g) table.emplace(m.object_ids[g], m.iou[g]);
    }
    return table;
}

}  // namespace ctxval
