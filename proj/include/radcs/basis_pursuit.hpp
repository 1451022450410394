#ifndef RADCS_BASIS_PURSUIT_HPP
#define RADCS_BASIS_PURSUIT_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "radcs/dct.hpp"
#include "radcs/measurement.hpp"

namespace radcs {

/// Basis-pursuit solver settings. Tolerances are relative; the primal one also
/// bounds the equality residual ||phi x - y|| / ||y|| of the returned block.
struct BPSolverConfig {
    int max_iterations = 2000;
    double primal_tolerance = 1e-5;
    double dual_tolerance = 1e-5;
    double penalty_parameter = 1.0;
    double over_relaxation = 1.5;

    void validate() const {
        if (max_iterations < 1) throw std::invalid_argument("BPSolverConfig: max_iterations must be >= 1");
        if (primal_tolerance <= 0 || dual_tolerance <= 0)
            throw std::invalid_argument("BPSolverConfig: tolerances must be positive");
        if (penalty_parameter <= 0) throw std::invalid_argument("BPSolverConfig: penalty must be positive");
    }
};

/// Outcome of one block recovery. A non-converged solve still returns the best
/// feasible iterate; callers decide whether the flag matters.
struct BlockRecovery {
    BlockVector x;
    bool converged = false;
    int iterations = 0;
    double equality_residual_rel = 0.0;
};

/// Measurement matrix with its Gram factorization, ready for projection steps.
struct PreparedOperator {
    Eigen::MatrixXf phi; // m x n, single precision
    Eigen::LLT<Eigen::MatrixXf> gram_llt;

    static PreparedOperator from(const MeasurementMatrix& mat) {
        PreparedOperator op;
        op.phi = mat.entries;
        Eigen::MatrixXf gram = Eigen::MatrixXf::Zero(op.phi.rows(), op.phi.rows());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(op.phi);
        op.gram_llt.compute(gram);
        if (op.gram_llt.info() != Eigen::Success) {
            // Rank-deficient draw (only possible near m = n); regularize slightly.
            gram.diagonal().array() += 1e-6f * gram.diagonal().mean();
            op.gram_llt.compute(gram);
        }
        return op;
    }
};

namespace detail {

/// phi * v with double accumulation (for residual checks and exact sensing).
inline Eigen::VectorXd matvec_f64(const Eigen::MatrixXf& phi, const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(phi.rows());
    for (int c = 0; c < phi.cols(); ++c)
        out += phi.col(c).cast<double>() * v[c];
    return out;
}

} // namespace detail

/// Solve  min ||theta x||_1  s.t.  phi x = y  by ADMM on the DCT coefficients
/// s = theta x: the s-update projects onto the affine set {A s = y} with
/// A = phi theta^T (so A A^T = phi phi^T), the z-update soft-thresholds, and
/// iterates stop on the usual primal/dual residual pair. The problem is scaled
/// by ||y||/sqrt(m) first so shrinkage behaves identically at all intensity
/// scales; the penalty applies to the scaled problem.
inline BlockRecovery basis_pursuit_admm(const PreparedOperator& op, const Eigen::VectorXd& y,
                                        const BPSolverConfig& config = {},
                                        const SparsityBasis& basis = block_basis()) {
    config.validate();
    const int m = int(op.phi.rows());
    const int n = int(op.phi.cols());
    if (int(y.size()) != m) throw std::invalid_argument("basis_pursuit_admm: y length does not match phi");

    BlockRecovery rec;
    rec.x.assign(std::size_t(n), 0.0f);

    const double ynorm = y.norm();
    if (ynorm == 0.0) { // zero measurements: zero block is feasible and l1-minimal
        rec.converged = true;
        return rec;
    }
    const double scale = ynorm / std::sqrt(double(m));
    const Eigen::VectorXd yn = y / scale;
    const Eigen::VectorXf ynf = yn.cast<float>();

    const double rho = config.penalty_parameter;
    const double kappa = 1.0 / rho;
    const double alpha = config.over_relaxation;
    const double eps_abs = 1e-12 * std::sqrt(double(n));

    auto apply_A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXf {
        return op.phi * basis.inverse(v).cast<float>().eval();
    };
    auto apply_At = [&](const Eigen::VectorXf& w) -> Eigen::VectorXd {
        return basis.forward((op.phi.transpose() * w).cast<double>().eval());
    };

    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd best_s = s;
    double best_score = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= config.max_iterations; ++it) {
        rec.iterations = it;
        // s-update: project z - u onto {A s = yn}
        Eigen::VectorXd q = z - u;
        Eigen::VectorXf d = apply_A(q) - ynf;
        s = q - apply_At(op.gram_llt.solve(d));
        // relaxed z-update (soft threshold) and scaled dual update, fused with norms
        double r_sq = 0.0, dz_sq = 0.0, s_sq = 0.0, z_sq = 0.0, u_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sh = alpha * s[i] + (1.0 - alpha) * z[i];
            const double v = sh + u[i];
            const double zi = v > kappa ? v - kappa : (v < -kappa ? v + kappa : 0.0);
            const double dz = zi - z[i];
            u[i] = v - zi;
            z[i] = zi;
            const double r = s[i] - zi;
            r_sq += r * r;
            dz_sq += dz * dz;
            s_sq += s[i] * s[i];
            z_sq += zi * zi;
            u_sq += u[i] * u[i];
        }
        const double r_norm = std::sqrt(r_sq);
        const double d_norm = rho * std::sqrt(dz_sq);
        const double eps_pri = eps_abs + config.primal_tolerance * std::sqrt(std::max(s_sq, z_sq));
        const double eps_dual = eps_abs + config.dual_tolerance * rho * std::sqrt(u_sq);
        const double score = std::max(r_norm / std::max(eps_pri, 1e-300),
                                      d_norm / std::max(eps_dual, 1e-300));
        if (score < best_score) {
            best_score = score;
            best_s = s;
        }
        if (r_norm <= eps_pri && d_norm <= eps_dual) {
            rec.converged = true;
            break;
        }
    }
    if (!rec.converged) s = best_s;

    // One step of feasibility refinement in double, then report the residual.
    Eigen::VectorXd x = basis.inverse(s);
    Eigen::VectorXd resid = yn - detail::matvec_f64(op.phi, x);
    s += apply_At(op.gram_llt.solve(resid.cast<float>().eval()));
    x = basis.inverse(s);
    rec.equality_residual_rel = (detail::matvec_f64(op.phi, x) - yn).norm() / yn.norm();

    for (int i = 0; i < n; ++i) rec.x[std::size_t(i)] = float(x[i] * scale);
    return rec;
}

/// Recover one block from its measurements, rebuilding phi from the key.
inline BlockRecovery reconstruct_block(const BlockMeasurement& meas, const BPSolverConfig& config = {}) {
    const MeasurementMatrix phi =
        build_measurement_matrix(meas.key.seed, meas.key.frame_id, meas.key.block, meas.key.m);
    return basis_pursuit_admm(PreparedOperator::from(phi), meas.y, config);
}

} // namespace radcs

#endif
