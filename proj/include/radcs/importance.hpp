#ifndef RADCS_IMPORTANCE_HPP
#define RADCS_IMPORTANCE_HPP

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "radcs/geometry.hpp"

namespace radcs {

enum class SizeClass { Small, Large };
enum class PatternVariant { RadInfo1, RadInfo2 };

/// Axis-aligned Cartesian detection box, meters relative to the vehicle.
struct Detection {
    double center_x_m = 0.0;
    double center_y_m = 0.0;
    double width_m = 0.0;
    double height_m = 0.0;
    SizeClass size_class = SizeClass::Small;
    double score = 1.0;

    double range_m() const { return std::hypot(center_x_m, center_y_m); }
};

/// Objects with either extent >= 6 m count as large (trucks, buses); typical
/// cars and motorbikes fall below.
inline SizeClass classify_size(double width_m, double height_m) {
    return std::max(width_m, height_m) >= 6.0 ? SizeClass::Large : SizeClass::Small;
}

inline SizeClass classify_size(const Detection& det) {
    return classify_size(det.width_m, det.height_m);
}

namespace detail {

inline int wrap_az(int a, const BlockGeometry& bg) {
    const int n = bg.az_blocks;
    return ((a % n) + n) % n;
}

inline void add_if_valid(std::set<BlockIndex>& out, int az, int rb, const BlockGeometry& bg) {
    if (rb < 0 || rb >= bg.range_blocks) return; // range clamps by dropping
    out.insert(BlockIndex{wrap_az(az, bg), rb});
}

} // namespace detail

/// 3x3 neighborhood around a block; azimuth wraps, range edges drop rows.
inline std::set<BlockIndex> pattern_3x3(BlockIndex center, const BlockGeometry& bg = {}) {
    std::set<BlockIndex> out;
    for (int da = -1; da <= 1; ++da)
        for (int dr = -1; dr <= 1; ++dr)
            detail::add_if_valid(out, center.az_block + da, center.range_block + dr, bg);
    return out;
}

/// 5x5 neighborhood for large objects that may span two blocks.
inline std::set<BlockIndex> pattern_5x5(BlockIndex center, const BlockGeometry& bg = {}) {
    std::set<BlockIndex> out;
    for (int da = -2; da <= 2; ++da)
        for (int dr = -2; dr <= 2; ++dr)
            detail::add_if_valid(out, center.az_block + da, center.range_block + dr, bg);
    return out;
}

/// T pattern for distant objects: azimuth extent 3 on the near and center
/// range rows, 5 on the far row, where far polar blocks cover more Cartesian
/// area. 11 blocks at an interior center.
inline std::set<BlockIndex> pattern_T(BlockIndex center, const BlockGeometry& bg = {}) {
    std::set<BlockIndex> out;
    for (int da = -1; da <= 1; ++da) {
        detail::add_if_valid(out, center.az_block + da, center.range_block - 1, bg);
        detail::add_if_valid(out, center.az_block + da, center.range_block, bg);
    }
    for (int da = -2; da <= 2; ++da)
        detail::add_if_valid(out, center.az_block + da, center.range_block + 1, bg);
    return out;
}

/// Extra azimuth strip (3 blocks each side) for objects closer than 16 m.
inline std::set<BlockIndex> near_av_augment(BlockIndex center, double range_m,
                                            const BlockGeometry& bg = {}) {
    std::set<BlockIndex> out;
    if (range_m >= 16.0) return out;
    for (int da : {-3, -2, -1, 1, 2, 3})
        detail::add_if_valid(out, center.az_block + da, center.range_block, bg);
    return out;
}

struct ImportanceMask {
    std::set<BlockIndex> important;
    std::vector<Detection> source_detections;
    PatternVariant variant = PatternVariant::RadInfo1;
};

struct MaskOptions {
    // -1: variant default (on for RadInfo2, off for RadInfo1)
    int near_av_override = -1;
    // RadInfo2 treatment of large objects inside 50 m: 5x5 if true, 3x3 if not
    bool large_within_50m_uses_5x5 = true;
};

/// Detections to important blocks. RadInfo1 keys the pattern on size alone;
/// RadInfo2 switches every object beyond 50 m to the T pattern and augments
/// the azimuth strip for objects inside 16 m.
inline ImportanceMask build_mask(const std::vector<Detection>& dets, PatternVariant variant,
                                 const MaskOptions& opts = {}, const FrameGeometry& geom = {},
                                 const BlockGeometry& bg = {}) {
    ImportanceMask mask;
    mask.variant = variant;
    mask.source_detections = dets;
    const bool near_av = opts.near_av_override >= 0 ? opts.near_av_override != 0
                                                    : variant == PatternVariant::RadInfo2;
    for (const Detection& det : dets) {
        const double range = det.range_m();
        BlockIndex center{0, 0};
        if (range > 0.0 && range <= geom.max_range_m)
            center = cartesian_point_to_block(det.center_x_m, det.center_y_m, geom, bg);
        else if (range > geom.max_range_m)
            continue; // outside the disc contributes nothing
        const SizeClass size = det.size_class;
        std::set<BlockIndex> pat;
        if (variant == PatternVariant::RadInfo1) {
            pat = size == SizeClass::Large ? pattern_5x5(center, bg) : pattern_3x3(center, bg);
        } else if (range < 50.0) {
            pat = size == SizeClass::Large && opts.large_within_50m_uses_5x5
                      ? pattern_5x5(center, bg)
                      : pattern_3x3(center, bg);
        } else {
            pat = pattern_T(center, bg);
        }
        mask.important.merge(pat);
        if (near_av) {
            std::set<BlockIndex> extra = near_av_augment(center, range, bg);
            mask.important.merge(extra);
        }
    }
    return mask;
}

} // namespace radcs

#endif
