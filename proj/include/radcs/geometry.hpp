#ifndef RADCS_GEOMETRY_HPP
#define RADCS_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace radcs {

// Raster geometry for a 400x576 polar radar frame: 400 azimuth rows covering
// 360 degrees, 576 range columns covering 100 m. Azimuth bin 0 points straight
// ahead of the vehicle (+y in Cartesian) and bins increase clockwise.

struct FrameGeometry {
    int n_azimuth_bins = 400;
    int n_range_bins = 576;
    double max_range_m = 100.0;

    double azimuth_step_deg() const { return 360.0 / n_azimuth_bins; }
    double range_step_m() const { return max_range_m / n_range_bins; }
};

struct BlockGeometry {
    int block_h = 20; // azimuth bins per block
    int block_w = 48; // range bins per block
    int az_blocks = 20;
    int range_blocks = 12;

    int pixels_per_block() const { return block_h * block_w; }
    int total_blocks() const { return az_blocks * range_blocks; }
    double block_azimuth_deg(const FrameGeometry& g) const { return block_h * g.azimuth_step_deg(); }
    double block_range_m(const FrameGeometry& g) const { return block_w * g.range_step_m(); }
};

struct BlockIndex {
    int az_block = 0;
    int range_block = 0;

    bool operator==(const BlockIndex&) const = default;
    auto operator<=>(const BlockIndex&) const = default;

    int linear(const BlockGeometry& b = {}) const { return az_block * b.range_blocks + range_block; }
    static BlockIndex from_linear(int lin, const BlockGeometry& b = {}) {
        return {lin / b.range_blocks, lin % b.range_blocks};
    }
    bool in_grid(const BlockGeometry& b = {}) const {
        return az_block >= 0 && az_block < b.az_blocks && range_block >= 0 && range_block < b.range_blocks;
    }
};

using BlockVector = std::vector<float>;

struct PolarFrame {
    std::vector<float> data; // row-major, [azimuth][range]
    std::int64_t frame_id = 0;
    double timestamp_s = 0.0;

    PolarFrame() = default;
    PolarFrame(std::int64_t id, const FrameGeometry& g = {})
        : data(std::size_t(g.n_azimuth_bins) * g.n_range_bins, 0.0f),
          frame_id(id), timestamp_s(id * 0.25) {}

    float& at(int az, int r, const FrameGeometry& g = {}) { return data[std::size_t(az) * g.n_range_bins + r]; }
    float at(int az, int r, const FrameGeometry& g = {}) const { return data[std::size_t(az) * g.n_range_bins + r]; }

    void validate(const FrameGeometry& g = {}) const {
        if (data.size() != std::size_t(g.n_azimuth_bins) * g.n_range_bins)
            throw std::invalid_argument("PolarFrame: expected " + std::to_string(g.n_azimuth_bins) + "x" +
                                        std::to_string(g.n_range_bins) + " raster, got " +
                                        std::to_string(data.size()) + " values");
        for (float v : data)
            if (!std::isfinite(v) || v < 0.0f)
                throw std::invalid_argument("PolarFrame: intensities must be finite and non-negative");
    }
};

struct CartesianFrame {
    std::vector<float> data; // row-major, side x side, AV at raster center
    int side = 1152;
    double meters_per_pixel = 100.0 / 576.0;
    std::int64_t frame_id = 0;

    float& at(int row, int col) { return data[std::size_t(row) * side + col]; }
    float at(int row, int col) const { return data[std::size_t(row) * side + col]; }

    // pixel center of (row, col) in meters; +x right, +y up (vehicle forward)
    double pixel_x_m(int col) const { return (col - (side - 1) * 0.5) * meters_per_pixel; }
    double pixel_y_m(int row) const { return ((side - 1) * 0.5 - row) * meters_per_pixel; }
};

/// Copy one 20x48 block out of a frame, row-major within the block.
inline BlockVector extract_block(const PolarFrame& frame, BlockIndex idx,
                                 const FrameGeometry& g = {}, const BlockGeometry& b = {}) {
    if (!idx.in_grid(b))
        throw std::out_of_range("extract_block: block index (" + std::to_string(idx.az_block) + "," +
                                std::to_string(idx.range_block) + ") outside 20x12 grid");
    BlockVector out(std::size_t(b.pixels_per_block()));
    const int r0 = idx.az_block * b.block_h;
    const int c0 = idx.range_block * b.block_w;
    for (int r = 0; r < b.block_h; ++r)
        for (int c = 0; c < b.block_w; ++c)
            out[std::size_t(r) * b.block_w + c] = frame.at(r0 + r, c0 + c, g);
    return out;
}

/// Inverse of extract_block; returns a copy of the frame with the block replaced.
inline PolarFrame insert_block(PolarFrame frame, BlockIndex idx, const BlockVector& block,
                               const FrameGeometry& g = {}, const BlockGeometry& b = {}) {
    if (!idx.in_grid(b))
        throw std::out_of_range("insert_block: block index outside grid");
    if (block.size() != std::size_t(b.pixels_per_block()))
        throw std::invalid_argument("insert_block: block has " + std::to_string(block.size()) +
                                    " values, expected " + std::to_string(b.pixels_per_block()));
    const int r0 = idx.az_block * b.block_h;
    const int c0 = idx.range_block * b.block_w;
    for (int r = 0; r < b.block_h; ++r)
        for (int c = 0; c < b.block_w; ++c)
            frame.at(r0 + r, c0 + c, g) = block[std::size_t(r) * b.block_w + c];
    return frame;
}

inline double wrap_deg(double deg) {
    double d = std::fmod(deg, 360.0);
    return d < 0.0 ? d + 360.0 : d;
}

/// Azimuth in degrees, clockwise from +y (vehicle forward), in [0, 360).
inline double azimuth_deg_of(double x_m, double y_m) {
    return wrap_deg(std::atan2(x_m, y_m) * 180.0 / std::numbers::pi);
}

/// Nearest-neighbor scan conversion to a 1152x1152 bird's-eye raster.
inline CartesianFrame polar_to_cartesian(const PolarFrame& frame, const FrameGeometry& g = {}) {
    CartesianFrame out;
    out.side = 2 * g.n_range_bins;
    out.meters_per_pixel = g.range_step_m();
    out.frame_id = frame.frame_id;
    out.data.assign(std::size_t(out.side) * out.side, 0.0f);
    const double step = g.range_step_m();
    for (int row = 0; row < out.side; ++row) {
        const double y = out.pixel_y_m(row);
        for (int col = 0; col < out.side; ++col) {
            const double x = out.pixel_x_m(col);
            const double range = std::hypot(x, y);
            const int rbin = int(std::floor(range / step));
            if (rbin >= g.n_range_bins) continue; // outside the 100 m disc
            int abin = int(std::lround(azimuth_deg_of(x, y) / g.azimuth_step_deg())) % g.n_azimuth_bins;
            out.at(row, col) = frame.at(abin, rbin, g);
        }
    }
    return out;
}

/// Block containing a Cartesian point. Points at exactly max range clamp to the
/// last range block; the origin has no defined bearing and is rejected.
inline BlockIndex cartesian_point_to_block(double x_m, double y_m, const FrameGeometry& g = {},
                                           const BlockGeometry& b = {}) {
    const double range = std::hypot(x_m, y_m);
    if (range > g.max_range_m)
        throw std::out_of_range("cartesian_point_to_block: point at " + std::to_string(range) +
                                " m is outside the " + std::to_string(g.max_range_m) + " m disc");
    if (range == 0.0)
        throw std::domain_error("cartesian_point_to_block: origin has no defined bearing");
    const double az = azimuth_deg_of(x_m, y_m);
    int ab = int(std::floor(az / b.block_azimuth_deg(g)));
    int rb = int(std::floor(range / b.block_range_m(g)));
    ab = std::min(std::max(ab, 0), b.az_blocks - 1);
    rb = std::min(std::max(rb, 0), b.range_blocks - 1);
    return {ab, rb};
}

} // namespace radcs

#endif
