#include "csim/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csim/kernels.hpp"
#include "math_detail.hpp"

namespace csim {

double marginal_cost(double effort, const GameParams& params) {
    if (!(effort >= 0.0) || !(effort < params.e_max))
        fail(Errc::effort_out_of_range, "effort must lie in [0, e_max)");
    return detail::marginal_cost_raw(effort, params.cost_factor, params.e_max);
}

double marginal_reward(RewardScheme scheme, const TypeProfile& profile,
                       std::size_t i, const GameParams& params) {
    const double pool = profile.bet_total(params.award) + params.award;
    return pool * reward_share(scheme, profile, i);
}

double best_response(double mr, const GameParams& params) {
    if (!(mr >= 0.0))
        fail(Errc::invalid_argument, "marginal reward must be nonnegative");
    return detail::best_response_raw(mr, params.cost_factor, params.e_max);
}

Equilibrium attack_result(const TypeProfile& profile, RewardScheme scheme,
                          const GameParams& params) {
    const std::size_t n = profile.size();
    std::vector<double> mr(n);
    const double pool = profile.bet_total(params.award) + params.award;
    for (std::size_t i = 0; i < n; ++i)
        mr[i] = pool * reward_share(scheme, profile, i);

    Equilibrium eq;
    eq.efforts.resize(n);
    kernels::active_backend().best_response_batch(mr.data(), n, params.cost_factor,
                                                  params.e_max, eq.efforts.data());
    eq.raw_total = 0.0;
    for (double e : eq.efforts) eq.raw_total += e;
    eq.attack_result = std::min(eq.raw_total, 1.0);
    return eq;
}

DominanceReport verify_dominance(const TypeProfile& profile, RewardScheme scheme,
                                 const GameParams& params, std::size_t i,
                                 double candidate_effort,
                                 std::span<const std::vector<double>> opponents,
                                 double grid_step) {
    if (i >= profile.size())
        fail(Errc::invalid_argument, "attacker index out of range");
    if (!(candidate_effort >= 0.0) || !(candidate_effort <= 1.0))
        fail(Errc::effort_out_of_range, "candidate effort must lie in [0, 1]");
    if (!(grid_step > 0.0) || !(grid_step <= 1.0))
        fail(Errc::invalid_argument, "grid step must lie in (0, 1]");

    const auto n_points = static_cast<std::size_t>(std::llround(1.0 / grid_step)) + 1;
    const auto& kern = kernels::active_backend();

    std::vector<double> cost_grid(n_points);
    kern.cost_curve(0.0, grid_step, n_points, params.cost_factor, params.e_max,
                    cost_grid.data());

    const double mr = marginal_reward(scheme, profile, i, params);
    const double bet_i = profile.bet(i, params.award);
    const double cand_cost =
        detail::cost_raw(candidate_effort, params.cost_factor, params.e_max);

    // With the unsaturated utility mr*(e_i + E) - cost(e_i) - bet_i the
    // opponents only shift the objective by a constant, so the argmax must
    // sit still; the scan verifies exactly that.
    static const std::vector<double> no_opponents;
    std::span<const std::vector<double>> rows = opponents;
    if (rows.empty()) rows = std::span(&no_opponents, 1);

    DominanceReport report;
    report.max_gain = -std::numeric_limits<double>::infinity();
    double argmax_lo = std::numeric_limits<double>::infinity();
    double argmax_hi = -argmax_lo;

    for (const auto& row : rows) {
        if (row.size() != profile.size() - 1)
            fail(Errc::invalid_argument, "opponent vector has wrong arity");
        double e_others = 0.0;
        for (double e : row) {
            if (!(e >= 0.0) || !(e <= 1.0))
                fail(Errc::effort_out_of_range, "opponent effort must lie in [0, 1]");
            e_others += e;
        }
        const double offset = std::fma(mr, e_others, -bet_i);
        double best_v = 0.0;
        const std::size_t best_k = kern.argmax_affine_minus_cost(
            mr, offset, 0.0, grid_step, cost_grid.data(), n_points, &best_v);
        const double best_e = std::fma(static_cast<double>(best_k), grid_step, 0.0);
        const double cand_v = std::fma(mr, candidate_effort, offset) - cand_cost;
        report.max_gain = std::max(report.max_gain, best_v - cand_v);
        argmax_lo = std::min(argmax_lo, best_e);
        argmax_hi = std::max(argmax_hi, best_e);
    }

    report.grid_argmax = argmax_lo;
    report.argmax_spread = argmax_hi - argmax_lo;
    report.dominant = report.max_gain <= 1e-9;
    return report;
}

} // namespace csim
