#pragma once

#include <cstddef>
#include <vector>

#include "csim/equilibrium.hpp"
#include "csim/model.hpp"

namespace csim {

// Net transfers at settlement: payment_i = reward_i(attack_result) - bet_i.
// Stakes were escrowed at commit time, so a payment can be negative (the
// attacker forfeits part of its bet) but never below -bet_i.
struct Outcome {
    double attack_result = 0.0;
    std::vector<double> payments;
};

struct Solution {
    Equilibrium equilibrium;
    Outcome outcome;
};

// Solves the attack phase and settles in one pass; the building block the
// other mechanism queries share.
Solution solve(const TypeProfile& profile, RewardScheme scheme,
               const GameParams& params);

Outcome payments(const TypeProfile& profile, RewardScheme scheme,
                 const GameParams& params);

// Utility attacker i walks away with when it used k ledger transactions to
// place its stake: payment_i - cost(effort_i) - k * fee_delta. k >= 1.
double quasi_utility(const TypeProfile& profile, std::size_t i, int k,
                     RewardScheme scheme, const GameParams& params);

struct SplitReport {
    double truthful_utility = 0.0; // one identity, one transaction
    double split_utility = 0.0;    // k identities, k transactions
    double delta_gap = 0.0;        // truthful - split
};

// Replaces attacker i by k sybil identities whose bets sum to bet_i and
// compares total utility. split: the k type parts (must sum to t_i within
// 1e-12, every part positive). Under the linear scheme the gap is exactly
// (k-1) * fee_delta: shares, efforts and payments are additive in the bet,
// so splitting only multiplies the transaction fee.
SplitReport check_dsic_split(const TypeProfile& profile, std::size_t i,
                             const std::vector<double>& split,
                             RewardScheme scheme, const GameParams& params);

struct BudgetReport {
    bool ok = false;
    double total_payments = 0.0;
    double slack = 0.0; // award - total_payments
};

// The sponsor never pays out more than the escrowed award:
// sum payments = (bet_t + AW) * ar - bet_t <= AW since ar <= 1.
BudgetReport check_budget(const Outcome& outcome, const GameParams& params);

// Default participation threshold: an attacker joins if its settled utility
// covers the two transactions of a commit/withdraw round trip.
double default_ir_threshold(const GameParams& params); // 2 * fee_delta

// flags[i] = quasi_utility(i, k=1) >= threshold - 1e-9.
std::vector<bool> check_ex_post_ir(const TypeProfile& profile, RewardScheme scheme,
                                   const GameParams& params, double threshold);

// Root-mean-square gap between actual payments and an ideal
// pay-per-realized-contribution rule: fair_i = AW * ehat_i * ar, where the
// ehat_i are the equilibrium efforts rescaled to sum to the saturated
// attack result (equal to the raw efforts whenever the total stays <= 1).
// 0 means payments track contributions exactly.
double fairness_score(const TypeProfile& profile, RewardScheme scheme,
                      const GameParams& params);

// AW - sum payments; what the sponsor keeps of the escrowed award.
double sponsor_residual(const Outcome& outcome, const GameParams& params);

} // namespace csim
