#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "csim/errors.hpp"

namespace csim {

// Absolute tolerance for currency comparisons throughout the library.
inline constexpr double currency_tol = 1e-9;

enum class RewardScheme { linear, square };

const char* to_string(RewardScheme scheme);
RewardScheme parse_scheme(const std::string& text); // throws config_error

// Scenario constants shared by every stage of a game.
//
// Efforts are measured in units of the success threshold: e = 1 is exactly
// enough combined traffic to take the target down, e_max is the most a
// single attacker could ever generate. The cost of generating effort e is
//
//     cost(e) = cost_factor * (exp(e) - 1) / (e_max - e),
//
// smooth, increasing and convex on [0, e_max), with a pole at e_max.
// cost_factor is usually fixed through gamma = cost(1) / award, the price
// of a full solo attack relative to the prize.
struct GameParams {
    double award = 100.0;     // sponsor deposit backing the contract
    double e_max = 2.0;       // single-attacker traffic ceiling, > 1
    double cost_factor = 0.0; // c in the cost curve, > 0
    double gamma = 0.0;       // cost(1) / award, kept consistent with cost_factor
    double fee_delta = 0.1;   // flat per-transaction ledger fee, >= 0

    static GameParams from_gamma(double award, double e_max, double gamma,
                                 double fee_delta = 0.1);
    static GameParams from_cost_factor(double award, double e_max, double cost_factor,
                                       double fee_delta = 0.1);

    void validate() const; // throws invalid_argument on a broken invariant
};

// An attacker's type is its stake normalized by the award, t_i = bet_i / AW.
// Types live in the open interval (0, 1): a zero bet is no commitment and a
// bet at or above the award would dominate the prize itself.
class TypeProfile {
public:
    explicit TypeProfile(std::vector<double> types);

    const std::vector<double>& types() const noexcept { return types_; }
    std::size_t size() const noexcept { return types_.size(); }
    double type(std::size_t i) const { return types_.at(i); }

    double theta() const noexcept;                    // sum of types, bet_t / AW
    double bet(std::size_t i, double award) const;    // t_i * AW
    double bet_total(double award) const;             // theta * AW

private:
    std::vector<double> types_;
};

// bets -> types, validating each bet against (0, award).
TypeProfile normalize_types(const std::vector<double>& bets, double award);

// Share of the reward pool attacker i earns on success.
//   linear: bet_i / bet_t           (proportional to stake)
//   square: t_i^2 / sum_j t_j^2     (favors large stakes)
// Shares are in [0, 1] and sum to 1 over the profile.
double reward_share(RewardScheme scheme, const TypeProfile& profile, std::size_t i);

// Traffic-generation cost; domain [0, e_max).
double cost(double effort, const GameParams& params);

// Realized reward for attacker i when the combined effort is e_tot in [0, 1]:
// (bet_t + AW) * share_i * e_tot. The pool is the sponsor's award plus every
// stake, paid out in proportion to the achieved fraction of the attack.
double reward(RewardScheme scheme, const TypeProfile& profile, std::size_t i,
              double e_tot, const GameParams& params);

// Attack-phase utility of attacker i: reward minus own cost minus stake,
// with combined effort saturating at 1 (extra traffic earns nothing).
// Requires 0 <= effort_i <= e_tot and effort_i < e_max.
double attack_phase_utility(const TypeProfile& profile, std::size_t i,
                            double effort_i, double e_tot,
                            RewardScheme scheme, const GameParams& params);

} // namespace csim
