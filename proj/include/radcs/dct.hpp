#ifndef RADCS_DCT_HPP
#define RADCS_DCT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "radcs/geometry.hpp"

namespace radcs {

/// Orthonormal DCT-II matrix of order n.
inline Eigen::MatrixXd dct_matrix(int n) {
    Eigen::MatrixXd c(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int i = 0; i < n; ++i)
            c(k, i) = s * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
    return c;
}

/// Separable orthonormal 2-D DCT-II over a 20x48 block, acting on the
/// row-major length-960 vectorization. forward() is the analysis map theta;
/// inverse() is its transpose. Orthonormal, so norms are preserved.
class SparsityBasis {
public:
    explicit SparsityBasis(const BlockGeometry& b = {})
        : h_(b.block_h), w_(b.block_w), ch_(dct_matrix(b.block_h)), cw_(dct_matrix(b.block_w)) {}

    int size() const { return h_ * w_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
            x.data(), h_, w_);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> S = ch_ * X * cw_.transpose();
        return Eigen::Map<const Eigen::VectorXd>(S.data(), h_ * w_);
    }

    Eigen::VectorXd inverse(const Eigen::VectorXd& s) const {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(
            s.data(), h_, w_);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X = ch_.transpose() * S * cw_;
        return Eigen::Map<const Eigen::VectorXd>(X.data(), h_ * w_);
    }

    /// Dense 960x960 analysis matrix; test and tooling use only.
    Eigen::MatrixXd dense() const {
        const int n = size();
        Eigen::MatrixXd theta(n, n);
        for (int kr = 0; kr < h_; ++kr)
            for (int kc = 0; kc < w_; ++kc)
                for (int ir = 0; ir < h_; ++ir)
                    for (int ic = 0; ic < w_; ++ic)
                        theta(kr * w_ + kc, ir * w_ + ic) = ch_(kr, ir) * cw_(kc, ic);
        return theta;
    }

private:
    int h_, w_;
    Eigen::MatrixXd ch_, cw_;
};

/// Shared basis instance for the standard block size.
inline const SparsityBasis& block_basis() {
    static const SparsityBasis basis{};
    return basis;
}

} // namespace radcs

#endif
