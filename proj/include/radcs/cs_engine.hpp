#ifndef RADCS_CS_ENGINE_HPP
#define RADCS_CS_ENGINE_HPP

#include <cstdlib>
#include <list>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

#include "radcs/basis_pursuit.hpp"
#include "radcs/lp_allocator.hpp"
#include "radcs/measurement.hpp"

namespace radcs {

namespace detail {

inline unsigned worker_count() {
    if (const char* env = std::getenv("RADCS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

/// Static split of [0, n) across workers. Work items write to disjoint
/// preallocated slots, so results are identical to sequential execution.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    const unsigned workers = std::min<unsigned>(worker_count(), unsigned(std::max(n, 1)));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = int(w); i < n; i += int(workers)) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail

struct MatrixKeyHash {
    std::size_t operator()(const MatrixKey& k) const noexcept {
        return std::size_t(derive_stream(k.seed ^ 0x5bf03635d1dfb1c1ULL, std::uint64_t(k.frame_id),
                                         std::uint64_t(k.block.linear()), std::uint64_t(k.m)));
    }
};

/// Byte-capped LRU cache of measurement matrices and their Gram factorizations,
/// keyed by (seed, frame_id, block, m). Sensing fills matrices; reconstruction
/// promotes them to prepared operators and normally consumes them afterwards.
class OperatorCache {
public:
    static OperatorCache& instance() {
        static OperatorCache cache;
        return cache;
    }

    std::shared_ptr<const MeasurementMatrix> matrix(const MatrixKey& key) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (auto* e = find_touch(key)) return e->matrix;
        }
        auto built = std::make_shared<const MeasurementMatrix>(
            build_measurement_matrix(key.seed, key.frame_id, key.block, key.m));
        std::lock_guard<std::mutex> lock(mu_);
        if (auto* e = find_touch(key)) return e->matrix;
        insert_locked(key, built, nullptr);
        return built;
    }

    std::shared_ptr<const PreparedOperator> prepared(const MatrixKey& key) {
        std::shared_ptr<const MeasurementMatrix> mat;
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (auto* e = find_touch(key)) {
                if (e->prepared) return e->prepared;
                mat = e->matrix;
            }
        }
        if (!mat)
            mat = std::make_shared<const MeasurementMatrix>(
                build_measurement_matrix(key.seed, key.frame_id, key.block, key.m));
        auto prep = std::make_shared<const PreparedOperator>(PreparedOperator::from(*mat));
        std::lock_guard<std::mutex> lock(mu_);
        if (auto* e = find_touch(key)) {
            if (!e->prepared) {
                bytes_ += prepared_bytes(*prep);
                e->prepared = prep;
                evict_locked();
            }
            return e->prepared;
        }
        insert_locked(key, mat, prep);
        return prep;
    }

    void erase(const MatrixKey& key) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) return;
        bytes_ -= it->second.bytes;
        lru_.erase(it->second.lru_it);
        map_.erase(it);
    }

    void clear() {
        std::lock_guard<std::mutex> lock(mu_);
        map_.clear();
        lru_.clear();
        bytes_ = 0;
    }

    void set_capacity_bytes(std::size_t cap) {
        std::lock_guard<std::mutex> lock(mu_);
        capacity_ = cap;
        evict_locked();
    }

private:
    struct Entry {
        std::shared_ptr<const MeasurementMatrix> matrix;
        std::shared_ptr<const PreparedOperator> prepared;
        std::list<MatrixKey>::iterator lru_it;
        std::size_t bytes = 0;
    };

    static std::size_t matrix_bytes(const MeasurementMatrix& m) {
        return std::size_t(m.entries.size()) * sizeof(float) + 256;
    }
    static std::size_t prepared_bytes(const PreparedOperator& p) {
        return std::size_t(p.phi.size() + p.gram_llt.matrixLLT().size()) * sizeof(float) + 256;
    }

    Entry* find_touch(const MatrixKey& key) {
        auto it = map_.find(key);
        if (it == map_.end()) return nullptr;
        lru_.splice(lru_.begin(), lru_, it->second.lru_it);
        return &it->second;
    }

    void insert_locked(const MatrixKey& key, std::shared_ptr<const MeasurementMatrix> mat,
                       std::shared_ptr<const PreparedOperator> prep) {
        lru_.push_front(key);
        Entry e;
        e.matrix = std::move(mat);
        e.prepared = std::move(prep);
        e.lru_it = lru_.begin();
        e.bytes = matrix_bytes(*e.matrix) + (e.prepared ? prepared_bytes(*e.prepared) : 0);
        bytes_ += e.bytes;
        map_[key] = std::move(e);
        evict_locked();
    }

    void evict_locked() {
        while (bytes_ > capacity_ && lru_.size() > 1) {
            const MatrixKey victim = lru_.back();
            auto it = map_.find(victim);
            bytes_ -= it->second.bytes;
            map_.erase(it);
            lru_.pop_back();
        }
    }

    std::mutex mu_;
    std::size_t capacity_ = std::size_t(512) << 20;
    std::size_t bytes_ = 0;
    std::list<MatrixKey> lru_;
    std::unordered_map<MatrixKey, Entry, MatrixKeyHash> map_;
};

/// One frame's stored acquisition: raw pixels for fully sampled blocks
/// (m = 960), compressed measurements otherwise.
struct FrameMeasurements {
    std::int64_t frame_id = 0;
    std::uint64_t seed = 0;
    std::vector<int> m_per_block;            // block-linear order
    std::vector<Eigen::VectorXd> values;     // y (CS) or raw pixels (full)

    long total_values() const {
        long t = 0;
        for (const auto& v : values) t += long(v.size());
        return t;
    }
    bool block_is_raw(int linear, const BlockGeometry& bg = {}) const {
        return m_per_block[std::size_t(linear)] >= bg.pixels_per_block();
    }
};

/// Acquire a frame under a sampling plan. Blocks planned at full rate bypass
/// CS and store raw pixels.
inline FrameMeasurements sense_frame(const PolarFrame& frame, const SamplingPlan& plan,
                                     std::uint64_t seed, const FrameGeometry& g = {},
                                     const BlockGeometry& bg = {}) {
    const int nblocks = bg.total_blocks();
    if (int(plan.m_per_block.size()) != nblocks)
        throw std::invalid_argument("sense_frame: plan covers " + std::to_string(plan.m_per_block.size()) +
                                    " blocks, expected " + std::to_string(nblocks));
    if (frame.data.size() != std::size_t(g.n_azimuth_bins) * g.n_range_bins)
        throw std::invalid_argument("sense_frame: frame does not match geometry");
    FrameMeasurements out;
    out.frame_id = frame.frame_id;
    out.seed = seed;
    out.m_per_block = plan.m_per_block;
    out.values.assign(std::size_t(nblocks), {});
    detail::parallel_for(nblocks, [&](int lin) {
        const BlockIndex idx = BlockIndex::from_linear(lin, bg);
        const BlockVector block = extract_block(frame, idx, g, bg);
        const int m = plan.m_per_block[std::size_t(lin)];
        if (m >= bg.pixels_per_block()) {
            Eigen::VectorXd raw(block.size());
            for (std::size_t i = 0; i < block.size(); ++i) raw[long(i)] = block[i];
            out.values[std::size_t(lin)] = std::move(raw);
            return;
        }
        if (m < 1) throw std::invalid_argument("sense_frame: plan has empty block");
        const MatrixKey key{seed, frame.frame_id, idx, m};
        auto phi = OperatorCache::instance().matrix(key);
        out.values[std::size_t(lin)] = sense_block(block, *phi).y;
    });
    return out;
}

struct BlockConvergence {
    bool converged = true;
    int iterations = 0;
    double residual = 0.0;
};

struct FrameConvergenceReport {
    std::vector<BlockConvergence> blocks;
    int n_unconverged = 0;
    double worst_residual = 0.0;
    long total_iterations = 0;
};

struct FrameReconstruction {
    PolarFrame frame;
    FrameConvergenceReport report;
};

/// Reassemble a frame from stored measurements: raw blocks copy exactly, CS
/// blocks run basis pursuit. Negative solver outputs clamp to zero when the
/// frame is assembled. `consume_cache` drops each block's cached operator
/// after use to keep memory flat during scene runs.
inline FrameReconstruction reconstruct_frame(const FrameMeasurements& meas,
                                             const BPSolverConfig& config = {},
                                             bool consume_cache = false, const FrameGeometry& g = {},
                                             const BlockGeometry& bg = {}) {
    const int nblocks = bg.total_blocks();
    if (int(meas.m_per_block.size()) != nblocks || int(meas.values.size()) != nblocks)
        throw std::invalid_argument("reconstruct_frame: malformed measurements");
    FrameReconstruction out;
    out.frame = PolarFrame(meas.frame_id, g);
    out.report.blocks.assign(std::size_t(nblocks), {});
    detail::parallel_for(nblocks, [&](int lin) {
        const BlockIndex idx = BlockIndex::from_linear(lin, bg);
        const int m = meas.m_per_block[std::size_t(lin)];
        const Eigen::VectorXd& v = meas.values[std::size_t(lin)];
        BlockVector block(std::size_t(bg.pixels_per_block()));
        if (m >= bg.pixels_per_block()) {
            if (int(v.size()) != bg.pixels_per_block())
                throw std::invalid_argument("reconstruct_frame: raw block has wrong length");
            for (std::size_t i = 0; i < block.size(); ++i) block[i] = float(v[long(i)]);
        } else {
            if (int(v.size()) != m)
                throw std::invalid_argument("reconstruct_frame: measurement length mismatch");
            const MatrixKey key{meas.seed, meas.frame_id, idx, m};
            auto op = OperatorCache::instance().prepared(key);
            BlockRecovery rec = basis_pursuit_admm(*op, v, config);
            if (consume_cache) OperatorCache::instance().erase(key);
            out.report.blocks[std::size_t(lin)] = {rec.converged, rec.iterations, rec.equality_residual_rel};
            for (std::size_t i = 0; i < block.size(); ++i) block[i] = std::max(0.0f, rec.x[i]);
        }
        const int r0 = idx.az_block * bg.block_h;
        const int c0 = idx.range_block * bg.block_w;
        for (int r = 0; r < bg.block_h; ++r)
            for (int c = 0; c < bg.block_w; ++c)
                out.frame.at(r0 + r, c0 + c, g) = block[std::size_t(r) * bg.block_w + c];
    });
    for (const BlockConvergence& bc : out.report.blocks) {
        if (!bc.converged && bc.iterations > 0) ++out.report.n_unconverged;
        out.report.worst_residual = std::max(out.report.worst_residual, bc.residual);
        out.report.total_iterations += bc.iterations;
    }
    return out;
}

} // namespace radcs

#endif
