#ifndef RADCS_EVALUATION_HPP
#define RADCS_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "radcs/geometry.hpp"
#include "radcs/importance.hpp"

namespace radcs {

/// Axis-aligned box, center + extent in meters.
struct Box {
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;

    static Box of(const Detection& d) { return {d.center_x_m, d.center_y_m, d.width_m, d.height_m}; }
};

struct ScoredBox {
    Box box;
    double score = 1.0;
};

/// Intersection over union of two axis-aligned boxes.
inline double iou(const Box& a, const Box& b) {
    if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0)
        throw std::invalid_argument("iou: boxes must have positive extents");
    const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) -
                                        std::max(a.cx - a.w / 2, b.cx - b.w / 2));
    const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) -
                                        std::max(a.cy - a.h / 2, b.cy - b.h / 2));
    const double inter = ix * iy;
    return inter / (a.w * a.h + b.w * b.h - inter);
}

namespace detail {

/// Greedy matching in descending score order (stable on ties); each truth box
/// is claimed at most once. Returns one TP/FP flag per detection, sorted order.
inline std::vector<char> match_detections(std::vector<ScoredBox> dets, const std::vector<Box>& truth,
                                          double iou_threshold) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    std::vector<char> tp(dets.size(), 0);
    std::vector<char> used(truth.size(), 0);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        double best = 0.0;
        std::size_t best_j = truth.size();
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (used[j]) continue;
            const double v = iou(dets[i].box, truth[j]);
            if (v >= iou_threshold && v > best) {
                best = v;
                best_j = j;
            }
        }
        if (best_j < truth.size()) {
            used[best_j] = 1;
            tp[i] = 1;
        }
    }
    return tp;
}

/// Area under the precision-recall curve with all-points interpolation.
inline double ap_from_matches(const std::vector<char>& tp_sorted, std::size_t n_truth) {
    if (n_truth == 0) return tp_sorted.empty() ? 1.0 : 0.0;
    if (tp_sorted.empty()) return 0.0;
    const std::size_t n = tp_sorted.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp_cum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tp_cum += tp_sorted[i] ? 1 : 0;
        precision[i] = double(tp_cum) / double(i + 1);
        recall[i] = double(tp_cum) / double(n_truth);
    }
    for (std::size_t i = n - 1; i > 0; --i) // precision envelope, right to left
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = recall[0] * precision[0];
    for (std::size_t i = 1; i < n; ++i) ap += (recall[i] - recall[i - 1]) * precision[i];
    return ap;
}

} // namespace detail

/// Average precision at one IoU threshold. Empty truth scores 1.0 only when
/// there are also no detections.
inline double average_precision(const std::vector<ScoredBox>& dets, const std::vector<Box>& truth,
                                double iou_threshold) {
    return detail::ap_from_matches(detail::match_detections(dets, truth, iou_threshold), truth.size());
}

inline const std::vector<double>& ap_thresholds() {
    static const std::vector<double> t = [] {
        std::vector<double> v;
        for (int i = 0; i < 10; ++i) v.push_back(0.50 + 0.05 * i);
        return v;
    }();
    return t;
}

/// Mean AP over IoU 0.50:0.05:0.95.
inline double average_precision_coco(const std::vector<ScoredBox>& dets, const std::vector<Box>& truth) {
    double sum = 0.0;
    for (double t : ap_thresholds()) sum += average_precision(dets, truth, t);
    return sum / double(ap_thresholds().size());
}

/// Per-frame reconstruction + detection quality. NMSE is undefined for an
/// all-zero original (nmse_defined false); PSNR of a perfect reconstruction is
/// reported as +infinity.
struct MetricBundle {
    double nmse = 0.0;
    bool nmse_defined = true;
    double psnr_db = 0.0;
    double ap50 = 0.0;
    double ap = 0.0;
};

inline double frame_nmse(const PolarFrame& original, const PolarFrame& reconstruction) {
    if (original.data.size() != reconstruction.data.size())
        throw std::invalid_argument("frame_nmse: frame sizes differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < original.data.size(); ++i) {
        const double d = double(reconstruction.data[i]) - double(original.data[i]);
        num += d * d;
        den += double(original.data[i]) * double(original.data[i]);
    }
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return num / den;
}

inline double frame_psnr_db(const PolarFrame& original, const PolarFrame& reconstruction) {
    double mse = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < original.data.size(); ++i) {
        const double d = double(reconstruction.data[i]) - double(original.data[i]);
        mse += d * d;
        peak = std::max(peak, double(original.data[i]));
    }
    mse /= double(original.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    if (peak == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 10.0 * std::log10(peak * peak / mse);
}

inline MetricBundle frame_metrics(const PolarFrame& original, const PolarFrame& reconstruction,
                                  const std::vector<ScoredBox>& dets, const std::vector<Box>& truth) {
    MetricBundle mb;
    mb.nmse = frame_nmse(original, reconstruction);
    mb.nmse_defined = !std::isnan(mb.nmse);
    mb.psnr_db = frame_psnr_db(original, reconstruction);
    mb.ap50 = average_precision(dets, truth, 0.50);
    mb.ap = average_precision_coco(dets, truth);
    return mb;
}

/// Pooled AP across many frames: matching stays within each frame, the PR
/// curve is built over the pooled detections (the per-scene aggregate).
struct PooledAp {
    std::vector<std::pair<double, char>> scored_matches; // (score, tp)
    std::size_t n_truth = 0;

    void add_frame(const std::vector<ScoredBox>& dets, const std::vector<Box>& truth,
                   double iou_threshold) {
        std::vector<ScoredBox> sorted = dets;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
        std::vector<char> tp = detail::match_detections(dets, truth, iou_threshold);
        for (std::size_t i = 0; i < sorted.size(); ++i)
            scored_matches.emplace_back(sorted[i].score, tp[i]);
        n_truth += truth.size();
    }

    double value() const {
        if (n_truth == 0) return scored_matches.empty() ? 1.0 : 0.0;
        std::vector<std::pair<double, char>> sm = scored_matches;
        std::stable_sort(sm.begin(), sm.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<char> tp(sm.size());
        for (std::size_t i = 0; i < sm.size(); ++i) tp[i] = sm[i].second;
        return detail::ap_from_matches(tp, n_truth);
    }
};

/// Intensity-weighted squared reconstruction error over a pixel subset,
/// normalized by the weighted original energy.
inline double weighted_region_error(const PolarFrame& original, const PolarFrame& reconstruction,
                                    const std::vector<std::uint32_t>& pixel_indices) {
    double num = 0.0, den = 0.0;
    for (std::uint32_t idx : pixel_indices) {
        const double w = double(original.data[idx]);
        const double d = double(reconstruction.data[idx]) - double(original.data[idx]);
        num += w * d * d;
        den += w * double(original.data[idx]) * double(original.data[idx]);
    }
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return num / den;
}

} // namespace radcs

#endif
