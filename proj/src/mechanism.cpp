#include "csim/mechanism.hpp"

#include <cmath>
#include <numeric>

#include "csim/kernels.hpp"

namespace csim {

Solution solve(const TypeProfile& profile, RewardScheme scheme,
               const GameParams& params) {
    Solution sol;
    sol.equilibrium = attack_result(profile, scheme, params);
    sol.outcome.attack_result = sol.equilibrium.attack_result;
    sol.outcome.payments.resize(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i)
        sol.outcome.payments[i] =
            reward(scheme, profile, i, sol.outcome.attack_result, params) -
            profile.bet(i, params.award);
    return sol;
}

Outcome payments(const TypeProfile& profile, RewardScheme scheme,
                 const GameParams& params) {
    return solve(profile, scheme, params).outcome;
}

double quasi_utility(const TypeProfile& profile, std::size_t i, int k,
                     RewardScheme scheme, const GameParams& params) {
    if (k < 1)
        fail(Errc::invalid_transaction_count, "transaction count must be >= 1");
    if (i >= profile.size())
        fail(Errc::invalid_argument, "attacker index out of range");
    const Solution sol = solve(profile, scheme, params);
    return sol.outcome.payments[i] - cost(sol.equilibrium.efforts[i], params) -
           static_cast<double>(k) * params.fee_delta;
}

SplitReport check_dsic_split(const TypeProfile& profile, std::size_t i,
                             const std::vector<double>& split,
                             RewardScheme scheme, const GameParams& params) {
    if (i >= profile.size())
        fail(Errc::invalid_argument, "attacker index out of range");
    if (split.empty())
        fail(Errc::split_mismatch, "split must have at least one part");
    double part_sum = 0.0;
    for (double part : split) {
        if (!(part > 0.0))
            fail(Errc::split_mismatch, "split parts must be positive");
        part_sum += part;
    }
    const double t_i = profile.type(i);
    if (std::abs(part_sum - t_i) > 1e-12)
        fail(Errc::split_mismatch, "split parts must sum to the original type");

    const auto k = static_cast<int>(split.size());

    // Sybil identities share one attack machine: the deviator still chooses a
    // single total effort, priced by the cost curve once, but its marginal
    // reward is the combined share of the k identities. Bets, window and
    // opponents are unchanged; only the ledger footprint (k fees) differs.
    std::vector<double> types = profile.types();
    types[i] = split[0];
    types.insert(types.end(), split.begin() + 1, split.end());
    const TypeProfile split_profile{std::move(types)};

    const double pool = split_profile.bet_total(params.award) + params.award;
    double deviator_share = reward_share(scheme, split_profile, i);
    for (std::size_t j = 1; j < split.size(); ++j)
        deviator_share +=
            reward_share(scheme, split_profile, profile.size() + j - 1);

    // One batch through the active kernel, the same path solve() takes, so
    // the truthful and split efforts come out of identical bisections.
    std::vector<double> mr;
    mr.reserve(profile.size());
    mr.push_back(pool * deviator_share);
    for (std::size_t m = 0; m < profile.size(); ++m)
        if (m != i) mr.push_back(pool * reward_share(scheme, split_profile, m));
    std::vector<double> efforts(mr.size());
    kernels::active_backend().best_response_batch(
        mr.data(), mr.size(), params.cost_factor, params.e_max, efforts.data());
    const double e_dev = efforts[0];
    double raw_total = 0.0;
    for (double e : efforts) raw_total += e;
    const double ar = std::min(raw_total, 1.0);
    const double bet_i = profile.bet(i, params.award);
    const double p_dev = pool * deviator_share * ar - bet_i;

    SplitReport report;
    report.truthful_utility = quasi_utility(profile, i, 1, scheme, params);
    report.split_utility =
        p_dev - cost(e_dev, params) - static_cast<double>(k) * params.fee_delta;
    report.delta_gap = report.truthful_utility - report.split_utility;
    return report;
}

BudgetReport check_budget(const Outcome& outcome, const GameParams& params) {
    BudgetReport report;
    report.total_payments = std::accumulate(outcome.payments.begin(),
                                            outcome.payments.end(), 0.0);
    report.slack = params.award - report.total_payments;
    report.ok = report.total_payments <= params.award + currency_tol;
    return report;
}

double default_ir_threshold(const GameParams& params) {
    return 2.0 * params.fee_delta;
}

std::vector<bool> check_ex_post_ir(const TypeProfile& profile, RewardScheme scheme,
                                   const GameParams& params, double threshold) {
    const Solution sol = solve(profile, scheme, params);
    std::vector<bool> flags(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double u = sol.outcome.payments[i] -
                         cost(sol.equilibrium.efforts[i], params) - params.fee_delta;
        flags[i] = u >= threshold - currency_tol;
    }
    return flags;
}

double fairness_score(const TypeProfile& profile, RewardScheme scheme,
                      const GameParams& params) {
    const Solution sol = solve(profile, scheme, params);
    const double raw = sol.equilibrium.raw_total;
    const double ar = sol.outcome.attack_result;
    // Realized contributions: efforts rescaled onto the saturated result, so
    // the ideal split references traffic that counted, not overshoot.
    const double scale = raw > 1.0 ? 1.0 / raw : 1.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double fair =
            params.award * (sol.equilibrium.efforts[i] * scale) * ar;
        const double d = sol.outcome.payments[i] - fair;
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq / static_cast<double>(profile.size()));
}

double sponsor_residual(const Outcome& outcome, const GameParams& params) {
    return params.award - std::accumulate(outcome.payments.begin(),
                                          outcome.payments.end(), 0.0);
}

} // namespace csim
