// Per-object detection performance: prediction matching and box IOU.
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ctxval/dataset.hpp"

namespace ctxval {

/// area(a ∩ b) / area(a ∪ b) on continuous boxes; 0 when disjoint.
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// Outcome of matching one image's predictions to its ground truth.
/// Vectors are indexed by ground-truth position within the image.
struct MatchAssignment {
    std::vector<ObjectId> object_ids;
    std::vector<std::optional<std::size_t>> prediction_of;
    std::vector<double> iou;
    /// Predictions at or above the confidence floor that matched nothing.
    std::vector<std::size_t> unmatched_prediction_indices;
};

/// Greedy one-to-one matching, highest confidence first. Each prediction
/// takes the still-unmatched same-class object with the largest positive IOU.
/// Confidence ties go to the prediction with the larger best-IOU, then the
/// lower index. Predictions below `confidence_floor` are ignored.
MatchAssignment match_predictions(const ImageRecord& img, double confidence_floor = 0.0);

using PerformanceTable = std::map<ObjectId, double>;

/// IOU for every ground-truth object; unmatched objects score 0.
PerformanceTable object_performance(const Dataset& d, double confidence_floor = 0.0);

}  // namespace ctxval
