#ifndef RADCS_LP_ALLOCATOR_HPP
#define RADCS_LP_ALLOCATOR_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "radcs/geometry.hpp"

namespace radcs {

// Sampling-rate allocation. Important blocks get rate x1, the rest x2, chosen
// by maximizing the total sample count I*w*h*x1 + O*w*h*x2 subject to a global
// budget S, the coupling x1 >= 1.1 x2, and per-class box bounds.

struct BudgetLP {
    int important_blocks = 0; // I
    int other_blocks = 240;   // O
    int block_w = 48;
    int block_h = 20;
    double budget = 23040.0; // S
    double x1_lower = 0.10, x1_upper = 0.55;
    double x2_lower = 0.07, x2_upper = 0.10;

    double pixels_per_block() const { return double(block_w) * block_h; }
    double objective(double x1, double x2) const {
        return important_blocks * pixels_per_block() * x1 + other_blocks * pixels_per_block() * x2;
    }

    void validate() const {
        if (important_blocks < 0 || other_blocks < 0)
            throw std::invalid_argument("BudgetLP: block counts must be non-negative");
        if (x1_lower <= 0 || x1_lower > x1_upper || x1_upper > 1.0 ||
            x2_lower <= 0 || x2_lower > x2_upper || x2_upper > 1.0)
            throw std::invalid_argument("BudgetLP: rate bounds must satisfy 0 < lower <= upper <= 1");
        if (budget <= 0) throw std::invalid_argument("BudgetLP: budget must be positive");
    }
};

struct RateSolution {
    double x1 = 0.0;
    double x2 = 0.0;
    double achieved_budget = 0.0;
    bool feasible = false;
    bool relaxed_x1_lower = false; // infeasibility fallback was applied
    std::string diagnostic;        // violated constraint when infeasible
};

/// Total sample budget for a frame at the given rate.
inline int budget_for_rate(double rate, const FrameGeometry& g = {}) {
    if (!(rate > 0.0 && rate <= 1.0))
        throw std::invalid_argument("budget_for_rate: rate must be in (0,1]");
    return int(std::lround(rate * g.n_azimuth_bins * g.n_range_bins));
}

struct RateBounds {
    double x1_lower, x1_upper, x2_lower, x2_upper;
};

/// Paper-standard box bounds for the 10/20/30% operating points.
inline RateBounds bounds_for_rate(double rate) {
    const double eps = 1e-9;
    for (double r : {0.10, 0.20, 0.30})
        if (std::abs(rate - r) < eps) return {r, 0.55, 0.07, r};
    throw std::invalid_argument("bounds_for_rate: supported rates are 0.10, 0.20, 0.30");
}

inline BudgetLP make_budget_lp(int important, double rate, const FrameGeometry& g = {},
                               const BlockGeometry& b = {}) {
    const RateBounds rb = bounds_for_rate(rate);
    BudgetLP lp;
    lp.important_blocks = important;
    lp.other_blocks = b.total_blocks() - important;
    lp.block_w = b.block_w;
    lp.block_h = b.block_h;
    lp.budget = budget_for_rate(rate, g);
    lp.x1_lower = rb.x1_lower;
    lp.x1_upper = rb.x1_upper;
    lp.x2_lower = rb.x2_lower;
    lp.x2_upper = rb.x2_upper;
    return lp;
}

namespace detail {

struct LpPoint {
    double x1, x2;
};

inline bool lp_point_feasible(const BudgetLP& lp, double x1, double x2, double tol) {
    return x1 >= lp.x1_lower - tol && x1 <= lp.x1_upper + tol &&
           x2 >= lp.x2_lower - tol && x2 <= lp.x2_upper + tol &&
           x1 - 1.1 * x2 >= -tol &&
           lp.objective(x1, x2) <= lp.budget + tol * lp.pixels_per_block() * 240.0;
}

inline RateSolution solve_rates_once(const BudgetLP& lp) {
    const double tol = 1e-9;
    RateSolution sol;

    // Degenerate cases: with no blocks in a class its rate does not enter the
    // objective; report that class at its lower bound and solve the other
    // single-variable cap directly.
    if (lp.important_blocks == 0) {
        const double cap = lp.budget / (lp.other_blocks * lp.pixels_per_block());
        const double x2 = std::min(lp.x2_upper, cap);
        if (x2 < lp.x2_lower - tol) {
            sol.diagnostic = "budget below O*w*h*x2_lower";
            return sol;
        }
        sol.x1 = lp.x1_lower;
        sol.x2 = x2;
        sol.feasible = true;
        sol.achieved_budget = lp.objective(sol.x1, sol.x2);
        return sol;
    }
    if (lp.other_blocks == 0) {
        const double cap = lp.budget / (lp.important_blocks * lp.pixels_per_block());
        const double x1 = std::min(lp.x1_upper, cap);
        if (x1 < lp.x1_lower - tol) {
            sol.diagnostic = "budget below I*w*h*x1_lower";
            return sol;
        }
        if (x1 < 1.1 * lp.x2_lower - tol) {
            sol.diagnostic = "x1 cap below 1.1*x2_lower";
            return sol;
        }
        sol.x1 = x1;
        sol.x2 = lp.x2_lower;
        sol.feasible = true;
        sol.achieved_budget = lp.important_blocks * lp.pixels_per_block() * x1;
        return sol;
    }

    // General case: enumerate pairwise intersections of the five constraint
    // lines plus box corners, keep feasible ones, maximize the objective with
    // ties resolved toward larger x1 then larger x2.
    const double iwh = lp.important_blocks * lp.pixels_per_block();
    const double owh = lp.other_blocks * lp.pixels_per_block();
    std::vector<LpPoint> cands;
    const double x1s[] = {lp.x1_lower, lp.x1_upper};
    const double x2s[] = {lp.x2_lower, lp.x2_upper};
    for (double a : x1s)
        for (double b : x2s) cands.push_back({a, b});
    for (double a : x1s) {
        cands.push_back({a, a / 1.1});                    // x1 fixed, coupling line
        cands.push_back({a, (lp.budget - iwh * a) / owh}); // x1 fixed, budget line
    }
    for (double b : x2s) {
        cands.push_back({1.1 * b, b});                    // x2 fixed, coupling line
        cands.push_back({(lp.budget - owh * b) / iwh, b}); // x2 fixed, budget line
    }
    // coupling 1.1*x2 = x1 with budget face
    {
        const double x2 = lp.budget / (1.1 * iwh + owh);
        cands.push_back({1.1 * x2, x2});
    }

    bool found = false;
    double best_obj = 0.0;
    LpPoint best{0, 0};
    const double obj_tol = 1e-9 * std::max(1.0, lp.budget);
    for (const LpPoint& p : cands) {
        if (!std::isfinite(p.x1) || !std::isfinite(p.x2)) continue;
        if (!lp_point_feasible(lp, p.x1, p.x2, tol)) continue;
        const double obj = lp.objective(p.x1, p.x2);
        if (!found || obj > best_obj + obj_tol ||
            (obj > best_obj - obj_tol &&
             (p.x1 > best.x1 + tol || (p.x1 > best.x1 - tol && p.x2 > best.x2 + tol)))) {
            found = true;
            best_obj = obj;
            best = p;
        }
    }
    if (!found) {
        sol.diagnostic = "empty feasible region: I*w*h*x1_lower + O*w*h*x2_lower exceeds S or bounds conflict";
        return sol;
    }
    sol.x1 = std::clamp(best.x1, lp.x1_lower, lp.x1_upper);
    sol.x2 = std::clamp(best.x2, lp.x2_lower, lp.x2_upper);
    sol.feasible = true;
    sol.achieved_budget = lp.objective(sol.x1, sol.x2);
    return sol;
}

} // namespace detail

/// Exact LP optimum by vertex enumeration. An infeasible instance is retried
/// once with x1_lower relaxed down to 1.1*x2_lower (flagged in the solution).
inline RateSolution solve_rates(const BudgetLP& lp) {
    lp.validate();
    RateSolution sol = detail::solve_rates_once(lp);
    if (!sol.feasible && lp.x1_lower > 1.1 * lp.x2_lower) {
        BudgetLP relaxed = lp;
        relaxed.x1_lower = 1.1 * lp.x2_lower;
        RateSolution retry = detail::solve_rates_once(relaxed);
        if (retry.feasible) {
            retry.relaxed_x1_lower = true;
            retry.diagnostic = "x1_lower relaxed to 1.1*x2_lower";
            return retry;
        }
        sol.diagnostic += " (relaxation did not help)";
    }
    return sol;
}

/// Final per-block sampling rates and integer measurement counts.
struct SamplingPlan {
    std::vector<float> rate_per_block;  // 240 entries, block-linear order
    std::vector<int> m_per_block;       // 240 entries
    std::vector<std::uint8_t> important; // 240 flags
    long total_m = 0;
    long target_budget = 0;
    double x1 = 0.0, x2 = 0.0;
    bool relaxed = false;

    int n_important() const { return int(std::count(important.begin(), important.end(), 1)); }
};

/// Turn an LP solution into integer per-block counts: floor(960*rate) each,
/// then, when slack exceeds one sample per block, hand leftovers to important
/// blocks in index order without ever exceeding the budget or 960 per block.
inline SamplingPlan plan_from_rates(const std::set<BlockIndex>& important_set, const RateSolution& sol,
                                    long budget, const BlockGeometry& bg = {}) {
    if (!sol.feasible) throw std::invalid_argument("plan_from_rates: infeasible rate solution");
    const int nblocks = bg.total_blocks();
    const int px = bg.pixels_per_block();
    SamplingPlan plan;
    plan.rate_per_block.assign(std::size_t(nblocks), 0.0f);
    plan.m_per_block.assign(std::size_t(nblocks), 0);
    plan.important.assign(std::size_t(nblocks), 0);
    plan.target_budget = budget;
    plan.x1 = sol.x1;
    plan.x2 = sol.x2;
    plan.relaxed = sol.relaxed_x1_lower;
    for (const BlockIndex& b : important_set) {
        if (!b.in_grid(bg)) throw std::out_of_range("plan_from_rates: important block outside grid");
        plan.important[std::size_t(b.linear(bg))] = 1;
    }
    for (int i = 0; i < nblocks; ++i) {
        const double rate = plan.important[std::size_t(i)] ? sol.x1 : sol.x2;
        plan.rate_per_block[std::size_t(i)] = float(rate);
        plan.m_per_block[std::size_t(i)] = std::min(px, int(std::floor(px * rate + 1e-9)));
        plan.total_m += plan.m_per_block[std::size_t(i)];
    }
    if (plan.total_m < budget - nblocks) {
        // Redistribute leftover samples to important blocks, round-robin in
        // index order, staying within the budget and the 960-per-block cap.
        bool progress = true;
        while (plan.total_m < budget && progress) {
            progress = false;
            for (int i = 0; i < nblocks && plan.total_m < budget; ++i) {
                if (!plan.important[std::size_t(i)] || plan.m_per_block[std::size_t(i)] >= px) continue;
                ++plan.m_per_block[std::size_t(i)];
                ++plan.total_m;
                progress = true;
            }
        }
    }
    return plan;
}

/// Uniform plan at a single rate (standard-CS baseline and full sampling).
inline SamplingPlan uniform_plan(double rate, long budget, const BlockGeometry& bg = {}) {
    if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("uniform_plan: rate must be in (0,1]");
    SamplingPlan plan;
    const int nblocks = bg.total_blocks();
    const int px = bg.pixels_per_block();
    const int m = rate >= 0.999 ? px : std::min(px, int(std::floor(px * rate + 1e-9)));
    plan.rate_per_block.assign(std::size_t(nblocks), float(rate));
    plan.m_per_block.assign(std::size_t(nblocks), m);
    plan.important.assign(std::size_t(nblocks), 0);
    plan.total_m = long(m) * nblocks;
    plan.target_budget = budget;
    plan.x1 = rate;
    plan.x2 = rate;
    return plan;
}

} // namespace radcs

#endif
