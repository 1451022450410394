#ifndef RADCS_DETECTOR_HPP
#define RADCS_DETECTOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "radcs/geometry.hpp"
#include "radcs/importance.hpp"

namespace radcs {

/// Ground-truth annotation: one Cartesian box per object per frame.
struct GroundTruthBox {
    std::int64_t frame_id = 0;
    double center_x_m = 0.0;
    double center_y_m = 0.0;
    double width_m = 0.0;
    double height_m = 0.0;

    void validate(const FrameGeometry& g = {}) const {
        if (width_m <= 0 || height_m <= 0)
            throw std::invalid_argument("GroundTruthBox: extents must be positive");
        if (std::hypot(center_x_m, center_y_m) > g.max_range_m)
            throw std::invalid_argument("GroundTruthBox: center outside the range disc");
    }
};

using AnnotationTable = std::map<std::int64_t, std::vector<GroundTruthBox>>;

/// Returns the frame's annotations as perfect detections (score 1.0).
struct OracleBackend {
    AnnotationTable annotations;
};

/// Thresholds intensity and reports 4-connected bright components. With no
/// explicit threshold, mean + 3 sigma of the frame's nonzero pixels is used.
struct BlobBackend {
    std::optional<double> threshold;
    int min_area_px = 6;
    int max_detections = 30;
};

using DetectorBackend = std::variant<OracleBackend, BlobBackend>;

struct DetectionResult {
    std::vector<Detection> detections;
    bool missing_annotations = false; // oracle asked about an unknown frame
};

namespace detail {

inline std::vector<Detection> detect_oracle(const CartesianFrame& frame, const OracleBackend& oracle,
                                            bool& missing) {
    std::vector<Detection> out;
    auto it = oracle.annotations.find(frame.frame_id);
    if (it == oracle.annotations.end()) {
        missing = true;
        return out;
    }
    for (const GroundTruthBox& box : it->second) {
        Detection det;
        det.center_x_m = box.center_x_m;
        det.center_y_m = box.center_y_m;
        det.width_m = box.width_m;
        det.height_m = box.height_m;
        det.size_class = classify_size(box.width_m, box.height_m);
        det.score = 1.0;
        out.push_back(det);
    }
    return out;
}

inline std::vector<Detection> detect_blob(const CartesianFrame& frame, const BlobBackend& blob) {
    if (blob.min_area_px < 1) throw std::invalid_argument("BlobBackend: min_area_px must be >= 1");
    const int side = frame.side;
    double thr;
    if (blob.threshold) {
        thr = *blob.threshold;
        if (thr <= 0) throw std::invalid_argument("BlobBackend: threshold must be positive");
    } else {
        double sum = 0.0, sum2 = 0.0;
        long n = 0;
        for (float v : frame.data)
            if (v > 0.0f) {
                sum += v;
                sum2 += double(v) * v;
                ++n;
            }
        if (n == 0) return {};
        const double mean = sum / double(n);
        const double var = std::max(0.0, sum2 / double(n) - mean * mean);
        thr = mean + 3.0 * std::sqrt(var);
    }

    struct Component {
        double mass = 0.0;
        int min_r = 1 << 30, max_r = -1, min_c = 1 << 30, max_c = -1;
        int area = 0;
    };
    std::vector<std::uint8_t> visited(frame.data.size(), 0);
    std::vector<Component> comps;
    std::vector<int> stack;
    for (int start = 0; start < int(frame.data.size()); ++start) {
        if (visited[std::size_t(start)] || frame.data[std::size_t(start)] < thr) continue;
        Component comp;
        stack.push_back(start);
        visited[std::size_t(start)] = 1;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int r = p / side, c = p % side;
            comp.mass += frame.data[std::size_t(p)];
            comp.area += 1;
            comp.min_r = std::min(comp.min_r, r);
            comp.max_r = std::max(comp.max_r, r);
            comp.min_c = std::min(comp.min_c, c);
            comp.max_c = std::max(comp.max_c, c);
            const int nbrs[4] = {p - side, p + side, p - 1, p + 1};
            const bool ok[4] = {r > 0, r < side - 1, c > 0, c < side - 1};
            for (int k = 0; k < 4; ++k) {
                if (!ok[k]) continue;
                const int q = nbrs[k];
                if (!visited[std::size_t(q)] && frame.data[std::size_t(q)] >= thr) {
                    visited[std::size_t(q)] = 1;
                    stack.push_back(q);
                }
            }
        }
        if (comp.area >= blob.min_area_px) comps.push_back(comp);
    }
    std::stable_sort(comps.begin(), comps.end(),
                     [](const Component& a, const Component& b) { return a.mass > b.mass; });
    if (blob.max_detections >= 0 && int(comps.size()) > blob.max_detections)
        comps.resize(std::size_t(blob.max_detections));

    std::vector<Detection> out;
    const double top_mass = comps.empty() ? 1.0 : comps.front().mass;
    for (const Component& comp : comps) {
        Detection det;
        det.center_x_m = 0.5 * (frame.pixel_x_m(comp.min_c) + frame.pixel_x_m(comp.max_c));
        det.center_y_m = 0.5 * (frame.pixel_y_m(comp.min_r) + frame.pixel_y_m(comp.max_r));
        det.width_m = (comp.max_c - comp.min_c + 1) * frame.meters_per_pixel;
        det.height_m = (comp.max_r - comp.min_r + 1) * frame.meters_per_pixel;
        det.size_class = classify_size(det.width_m, det.height_m);
        det.score = comp.mass / top_mass;
        out.push_back(det);
    }
    return out;
}

} // namespace detail

/// Run the configured backend on one bird's-eye frame. Detections come back
/// ordered: oracle keeps annotation order, blob sorts by descending mass.
inline DetectionResult detect(const CartesianFrame& frame, const DetectorBackend& backend) {
    DetectionResult result;
    if (const auto* oracle = std::get_if<OracleBackend>(&backend))
        result.detections = detail::detect_oracle(frame, *oracle, result.missing_annotations);
    else
        result.detections = detail::detect_blob(frame, std::get<BlobBackend>(backend));
    return result;
}

} // namespace radcs

#endif
