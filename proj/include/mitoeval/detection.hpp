#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mitoeval/agreement.hpp"
#include "mitoeval/errors.hpp"
#include "mitoeval/types.hpp"

namespace mitoeval {

struct EvalConfig {
    double radius_um = 7.5;
    LabelFilter label_filter;
    double min_confidence = 0.0;
};

struct ScoredDetection {
    double confidence = 0.0;
    bool is_tp = false;
};

// Greedy confidence-ranked scoring. Detections are processed in descending
// confidence (ties by input order); each one claims the nearest still-free
// ground-truth point within radius_um on its image, TP if it got one, FP
// otherwise. Output preserves the processing order.
template <PointLike G>
std::vector<ScoredDetection> score_detections(const std::vector<Detection>& detections,
                                              const std::vector<G>& ground_truth,
                                              const EvalConfig& config, const ImageIndex& index) {
    if (config.radius_um <= 0.0) throw ConfigError("radius_um must be positive");

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        index.require(detections[i].image_id);
        if (detections[i].confidence >= config.min_confidence) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].confidence > detections[b].confidence;
    });

    std::map<std::string, std::vector<std::size_t>> gt_by_image;
    for (std::size_t j = 0; j < ground_truth.size(); ++j)
        gt_by_image[ground_truth[j].image_id].push_back(j);
    std::vector<bool> gt_used(ground_truth.size(), false);

    std::vector<ScoredDetection> scored;
    scored.reserve(order.size());
    for (std::size_t i : order) {
        const Detection& d = detections[i];
        std::size_t best = SIZE_MAX;
        double best_dist = 0.0;
        auto it = gt_by_image.find(d.image_id);
        if (it != gt_by_image.end()) {
            for (std::size_t j : it->second) {
                if (gt_used[j]) continue;
                const double dist = distance_um(d, ground_truth[j], index);
                if (dist > config.radius_um) continue;
                if (best == SIZE_MAX || dist < best_dist) {
                    best = j;
                    best_dist = dist;
                }
            }
        }
        if (best != SIZE_MAX) gt_used[best] = true;
        scored.push_back({d.confidence, best != SIZE_MAX});
    }
    return scored;
}

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;
    double confidence = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points; // one per detection, confidence descending
    long n_gt = 0;
    long n_det = 0;
};

inline PRCurve pr_curve(std::vector<ScoredDetection> scored, long n_gt) {
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredDetection& a, const ScoredDetection& b) {
                         return a.confidence > b.confidence;
                     });
    PRCurve curve;
    curve.n_gt = n_gt;
    curve.n_det = static_cast<long>(scored.size());
    long tp = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].is_tp) ++tp;
        const double prec = static_cast<double>(tp) / static_cast<double>(i + 1);
        const double rec = n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0;
        curve.points.push_back({rec, prec, scored[i].confidence});
    }
    return curve;
}

// All-points interpolated AP under the monotone precision envelope.
inline double average_precision(const std::vector<ScoredDetection>& scored, long n_gt) {
    if (n_gt < 0) throw ConfigError("n_gt must be non-negative");
    if (n_gt == 0) return scored.empty() ? 1.0 : 0.0;

    const PRCurve curve = pr_curve(scored, n_gt);
    const std::size_t m = curve.points.size();
    if (m == 0) return 0.0;

    std::vector<double> envelope(m);
    double running = 0.0;
    for (std::size_t i = m; i-- > 0;) {
        running = std::max(running, curve.points[i].precision);
        envelope[i] = running;
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        ap += (curve.points[i].recall - prev_recall) * envelope[i];
        prev_recall = curve.points[i].recall;
    }
    return ap;
}

struct GtEvalResult {
    double ap = 0.0;
    double best_f1 = 0.0;
    std::optional<double> best_f1_confidence; // empty when there are no detections
    long n_gt = 0;
    long n_det = 0;
    PRCurve curve;
};

template <PointLike G>
GtEvalResult evaluate_against(const std::vector<Detection>& detections,
                              const std::vector<G>& ground_truth, const EvalConfig& config,
                              const ImageIndex& index) {
    auto scored = score_detections(detections, ground_truth, config, index);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredDetection& a, const ScoredDetection& b) {
                         return a.confidence > b.confidence;
                     });
    const long n_gt = static_cast<long>(ground_truth.size());

    GtEvalResult r;
    r.ap = average_precision(scored, n_gt);
    r.n_gt = n_gt;
    r.curve = pr_curve(scored, n_gt);
    r.n_det = r.curve.n_det;

    // Best F1 over confidence-prefix cuts; keeping the top k detections gives
    // tp = cumulative TP count, fp = k - tp, fn = n_gt - tp. Ties keep the
    // smallest k, i.e. the highest cutoff.
    long tp = 0;
    for (std::size_t k = 0; k < scored.size(); ++k) {
        if (scored[k].is_tp) ++tp;
        const PRF prf = make_prf(tp, static_cast<long>(k + 1) - tp, n_gt - tp);
        if (prf.f1 > r.best_f1) {
            r.best_f1 = prf.f1;
            r.best_f1_confidence = scored[k].confidence;
        }
    }
    return r;
}

template <PointLike G>
std::map<std::string, GtEvalResult> cross_label_eval(
    const std::vector<Detection>& detections,
    const std::map<std::string, std::vector<G>>& ground_truths, const EvalConfig& config,
    const ImageIndex& index) {
    std::optional<std::set<std::string>> image_set;
    for (const auto& [name, gt] : ground_truths) {
        std::set<std::string> s;
        for (const auto& p : gt) s.insert(p.image_id);
        if (!image_set) {
            image_set = std::move(s);
        } else if (*image_set != s) {
            throw ImageSetMismatchError("ground-truth definitions cover different images");
        }
    }
    std::map<std::string, GtEvalResult> out;
    for (const auto& [name, gt] : ground_truths)
        out[name] = evaluate_against(detections, gt, config, index);
    return out;
}

} // namespace mitoeval
