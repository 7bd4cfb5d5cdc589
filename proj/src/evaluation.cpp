#include "rmk/evaluation.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "rmk/errors.hpp"

namespace rmk::eval {
namespace {

struct Candidate {
    double score;
    std::size_t image;
    std::size_t index;
};

}  // namespace

double average_precision(const std::vector<std::vector<geom::OrientedBox>>& preds,
                         const std::vector<std::vector<geom::OrientedBox>>& truth, int class_id,
                         double iou_threshold) {
    if (preds.size() != truth.size()) {
        throw ContractError("eval: " + std::to_string(preds.size()) + " prediction lists for " +
                            std::to_string(truth.size()) + " images");
    }
    std::vector<std::vector<const geom::OrientedBox*>> gts(truth.size());
    std::size_t n_truth = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (const auto& t : truth[i]) {
            if (t.class_id() == class_id) gts[i].push_back(&t);
        }
        n_truth += gts[i].size();
    }
    if (n_truth == 0) return 0.0;

    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < preds[i].size(); ++k) {
            if (preds[i][k].class_id() == class_id) cands.push_back({preds[i][k].score(), i, k});
        }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    // Matching within a tie group must not depend on image order, and images
    // never share truths, so processing each image's candidates in its own
    // order is enough.
    std::vector<std::vector<bool>> used(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) used[i].assign(gts[i].size(), false);

    std::vector<double> precision, recall;
    std::size_t tp = 0, fp = 0;
    for (std::size_t g = 0; g < cands.size();) {
        std::size_t end = g;
        while (end < cands.size() && cands[end].score == cands[g].score) ++end;
        for (std::size_t k = g; k < end; ++k) {
            const auto& c = cands[k];
            const auto& box = preds[c.image][c.index];
            double best = -1.0;
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < gts[c.image].size(); ++j) {
                if (used[c.image][j]) continue;
                const double iou = geom::rotated_iou(box, *gts[c.image][j]);
                if (iou > best) {
                    best = iou;
                    best_j = j;
                }
            }
            if (best >= iou_threshold) {
                used[c.image][best_j] = true;
                ++tp;
            } else {
                ++fp;
            }
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_truth));
        g = end;
    }

    // Envelope from the right, then integrate over recall steps.
    for (std::size_t k = precision.size(); k-- > 1;) {
        precision[k - 1] = std::max(precision[k - 1], precision[k]);
    }
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k) {
        ap += (recall[k] - prev_recall) * precision[k];
        prev_recall = recall[k];
    }
    return ap;
}

EvalResult eval_map(const std::vector<std::vector<geom::OrientedBox>>& preds,
                    const std::vector<std::vector<geom::OrientedBox>>& truth,
                    const EvalOptions& options) {
    if (!(options.iou_threshold >= 0.0 && options.iou_threshold <= 1.0)) {
        throw ContractError("eval: IoU threshold must lie in [0, 1]");
    }
    if (preds.size() != truth.size()) {
        throw ContractError("eval: " + std::to_string(preds.size()) + " prediction lists for " +
                            std::to_string(truth.size()) + " images");
    }
    std::map<int, ClassAp> classes;
    for (const auto& image : truth) {
        for (const auto& t : image) {
            auto& c = classes[t.class_id()];
            c.class_id = t.class_id();
            ++c.truths;
        }
    }
    for (const auto& image : preds) {
        for (const auto& p : image) {
            if (auto it = classes.find(p.class_id()); it != classes.end()) ++it->second.predictions;
        }
    }
    std::vector<double> thresholds;
    if (options.coco_sweep) {
        for (int k = 0; k < 10; ++k) thresholds.push_back(0.5 + 0.05 * k);
    } else {
        thresholds.push_back(options.iou_threshold);
    }
    EvalResult result;
    for (auto& [id, c] : classes) {
        double sum = 0.0;
        for (double t : thresholds) sum += average_precision(preds, truth, id, t);
        c.ap = sum / static_cast<double>(thresholds.size());
        result.per_class.push_back(c);
        result.map += c.ap;
    }
    if (!result.per_class.empty()) result.map /= static_cast<double>(result.per_class.size());
    return result;
}

}  // namespace rmk::eval
