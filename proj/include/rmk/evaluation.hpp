#pragma once

#include <vector>

#include "rmk/geometry.hpp"

namespace rmk::eval {

struct EvalOptions {
    double iou_threshold = 0.5;
    /// Average AP over IoU thresholds 0.50, 0.55, ..., 0.95 instead.
    bool coco_sweep = false;
};

struct ClassAp {
    int class_id = 0;
    int truths = 0;
    int predictions = 0;
    double ap = 0.0;
};

struct EvalResult {
    double map = 0.0;
    std::vector<ClassAp> per_class;  // classes with at least one truth, ascending id
};

/// All-point interpolated AP of one class at one IoU threshold. Predictions
/// are taken in descending score order; a prediction matches the unmatched
/// same-image truth of highest IoU when that IoU reaches the threshold.
/// Predictions of equal score enter the curve together.
double average_precision(const std::vector<std::vector<geom::OrientedBox>>& preds,
                         const std::vector<std::vector<geom::OrientedBox>>& truth, int class_id,
                         double iou_threshold);

/// Mean AP over classes present in the truth. Classes without truth are
/// left out of the mean; with no truth at all the result is 0.
EvalResult eval_map(const std::vector<std::vector<geom::OrientedBox>>& preds,
                    const std::vector<std::vector<geom::OrientedBox>>& truth,
                    const EvalOptions& options = {});

}  // namespace rmk::eval
