#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csim/model.hpp"

namespace csim {

// Equilibrium of the attack phase. Each attacker's effort is its dominant
// strategy (the utility is additively separable in opponents' efforts, so
// the best response does not depend on them); attack_result is the realized
// fraction of a successful attack, min(sum of efforts, 1).
struct Equilibrium {
    std::vector<double> efforts;
    double raw_total = 0.0;     // sum of efforts before saturation
    double attack_result = 0.0; // min(raw_total, 1)
};

// d cost / d effort; domain [0, e_max). Positive and strictly increasing.
double marginal_cost(double effort, const GameParams& params);

// d reward / d e_tot for attacker i: (bet_t + AW) * share_i. Constant in
// effort, which is what makes the game dominance-solvable.
double marginal_reward(RewardScheme scheme, const TypeProfile& profile,
                       std::size_t i, const GameParams& params);

// Unique maximizer of  mr * e - cost(e)  over [0, 1]:
//   0 when mr <= marginal_cost(0), 1 when mr >= marginal_cost(1),
//   otherwise the root of marginal_cost(e) = mr (bisection, |hi-lo| <= 1e-10).
double best_response(double marginal_reward, const GameParams& params);

Equilibrium attack_result(const TypeProfile& profile, RewardScheme scheme,
                          const GameParams& params);

struct DominanceReport {
    bool dominant = false;    // candidate within 1e-9 of the grid optimum
    double max_gain = 0.0;    // largest U(grid point) - U(candidate) found
    double grid_argmax = 0.0; // best grid effort over all opponent vectors
    double argmax_spread = 0.0; // max distance between per-opponent argmaxes
};

// Checks that candidate_effort is a dominant strategy for attacker i by
// scanning the effort grid {0, grid_step, ..., 1} against every opponent
// effort vector. Evaluates the unsaturated attack-phase utility
// mr*(e_i + E_-i) - cost(e_i) - bet_i, under which the argmax is provably
// opponent-independent; the report records how far the scan says the
// candidate is from optimal. opponents: one vector of size()-1 efforts per
// row, each entry in [0, 1].
DominanceReport verify_dominance(const TypeProfile& profile, RewardScheme scheme,
                                 const GameParams& params, std::size_t i,
                                 double candidate_effort,
                                 std::span<const std::vector<double>> opponents,
                                 double grid_step = 1e-3);

} // namespace csim
