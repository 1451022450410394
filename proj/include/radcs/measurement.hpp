#ifndef RADCS_MEASUREMENT_HPP
#define RADCS_MEASUREMENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "radcs/geometry.hpp"
#include "radcs/rng.hpp"

namespace radcs {

/// Keys the random stream for one block's measurement matrix. Rebuilding with
/// the same key yields a bit-identical matrix, which is what lets measurement
/// files stay compact: only the key travels, never the matrix.
struct MatrixKey {
    std::uint64_t seed = 0;
    std::int64_t frame_id = 0;
    BlockIndex block;
    int m = 0;

    bool operator==(const MatrixKey&) const = default;
    std::uint64_t stream() const {
        return derive_stream(seed, std::uint64_t(frame_id),
                             std::uint64_t(block.linear()), std::uint64_t(m));
    }
};

/// Dense Gaussian sensing matrix, stored in single precision. Entries are
/// i.i.d. N(0, 1/m), so columns have unit norm in expectation.
struct MeasurementMatrix {
    Eigen::MatrixXf entries; // m x 960
    MatrixKey key;

    int rows() const { return int(entries.rows()); }
    int cols() const { return int(entries.cols()); }
};

inline MeasurementMatrix build_measurement_matrix(std::uint64_t seed, std::int64_t frame_id,
                                                  BlockIndex block, int m,
                                                  const BlockGeometry& bg = {}) {
    const int n = bg.pixels_per_block();
    if (m < 1 || m > n)
        throw std::invalid_argument("build_measurement_matrix: m=" + std::to_string(m) +
                                    " outside [1," + std::to_string(n) + "]");
    if (!block.in_grid(bg))
        throw std::out_of_range("build_measurement_matrix: block index outside grid");
    MeasurementMatrix phi;
    phi.key = {seed, frame_id, block, m};
    phi.entries.resize(m, n);
    Rng rng(phi.key.stream());
    const double scale = 1.0 / std::sqrt(double(m));
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            phi.entries(r, c) = float(rng.normal() * scale);
    return phi;
}

/// One block's compressed acquisition: y = phi x, plus the key to rebuild phi.
struct BlockMeasurement {
    Eigen::VectorXd y;
    MatrixKey key;

    int m() const { return key.m; }
};

inline BlockMeasurement sense_block(const BlockVector& block, const MeasurementMatrix& phi) {
    if (int(block.size()) != phi.cols())
        throw std::invalid_argument("sense_block: block length " + std::to_string(block.size()) +
                                    " does not match matrix width " + std::to_string(phi.cols()));
    Eigen::VectorXf x(phi.cols());
    for (int i = 0; i < phi.cols(); ++i) x[i] = block[std::size_t(i)];
    BlockMeasurement meas;
    meas.key = phi.key;
    meas.y = (phi.entries * x).cast<double>();
    return meas;
}

} // namespace radcs

#endif
