#include "csim/model.hpp"

#include <cmath>
#include <numeric>

namespace csim {

const char* to_string(Errc code) {
    switch (code) {
    case Errc::non_positive_bet: return "non_positive_bet";
    case Errc::bet_exceeds_award: return "bet_exceeds_award";
    case Errc::effort_out_of_range: return "effort_out_of_range";
    case Errc::result_out_of_range: return "result_out_of_range";
    case Errc::invalid_transaction_count: return "invalid_transaction_count";
    case Errc::split_mismatch: return "split_mismatch";
    case Errc::insufficient_funds: return "insufficient_funds";
    case Errc::invalid_window: return "invalid_window";
    case Errc::too_early: return "too_early";
    case Errc::too_late: return "too_late";
    case Errc::bet_too_small: return "bet_too_small";
    case Errc::bad_signature: return "bad_signature";
    case Errc::already_settled: return "already_settled";
    case Errc::no_bets: return "no_bets";
    case Errc::config_error: return "config_error";
    case Errc::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

const char* to_string(RewardScheme scheme) {
    return scheme == RewardScheme::linear ? "linear" : "square";
}

RewardScheme parse_scheme(const std::string& text) {
    if (text == "linear") return RewardScheme::linear;
    if (text == "square") return RewardScheme::square;
    fail(Errc::config_error, "unknown reward scheme '" + text + "'");
}

namespace {

// cost(1) = gamma * award pins cost_factor:
//   c * (e - 1) / (e_max - 1) = gamma * AW.
constexpr double e_minus_1 = 1.7182818284590452354;

} // namespace

GameParams GameParams::from_gamma(double award, double e_max, double gamma,
                                  double fee_delta) {
    GameParams p;
    p.award = award;
    p.e_max = e_max;
    p.gamma = gamma;
    p.cost_factor = gamma * award * (e_max - 1.0) / e_minus_1;
    p.fee_delta = fee_delta;
    p.validate();
    return p;
}

GameParams GameParams::from_cost_factor(double award, double e_max,
                                        double cost_factor, double fee_delta) {
    GameParams p;
    p.award = award;
    p.e_max = e_max;
    p.cost_factor = cost_factor;
    p.gamma = cost_factor * e_minus_1 / ((e_max - 1.0) * award);
    p.fee_delta = fee_delta;
    p.validate();
    return p;
}

void GameParams::validate() const {
    if (!(award > 0.0))
        fail(Errc::invalid_argument, "award must be positive");
    if (!(e_max > 1.0))
        fail(Errc::invalid_argument, "e_max must exceed 1");
    if (!(cost_factor > 0.0))
        fail(Errc::invalid_argument, "cost_factor must be positive");
    if (!(fee_delta >= 0.0))
        fail(Errc::invalid_argument, "fee_delta must be nonnegative");
    const double implied = cost_factor * e_minus_1 / ((e_max - 1.0) * award);
    if (std::abs(implied - gamma) > 1e-9 * std::max(1.0, std::abs(gamma)))
        fail(Errc::invalid_argument, "gamma and cost_factor are inconsistent");
}

TypeProfile::TypeProfile(std::vector<double> types) : types_(std::move(types)) {
    if (types_.empty())
        fail(Errc::invalid_argument, "type profile must not be empty");
    for (double t : types_) {
        if (!(t > 0.0))
            fail(Errc::non_positive_bet, "type must be positive");
        if (!(t < 1.0))
            fail(Errc::bet_exceeds_award, "type must be below 1");
    }
}

double TypeProfile::theta() const noexcept {
    return std::accumulate(types_.begin(), types_.end(), 0.0);
}

double TypeProfile::bet(std::size_t i, double award) const {
    return types_.at(i) * award;
}

double TypeProfile::bet_total(double award) const {
    return theta() * award;
}

TypeProfile normalize_types(const std::vector<double>& bets, double award) {
    if (!(award > 0.0))
        fail(Errc::invalid_argument, "award must be positive");
    std::vector<double> types;
    types.reserve(bets.size());
    for (double b : bets) {
        if (!(b > 0.0))
            fail(Errc::non_positive_bet, "bet must be positive");
        if (!(b < award))
            fail(Errc::bet_exceeds_award, "bet must be below the award");
        types.push_back(b / award);
    }
    return TypeProfile(std::move(types));
}

double reward_share(RewardScheme scheme, const TypeProfile& profile, std::size_t i) {
    const auto& t = profile.types();
    if (i >= t.size())
        fail(Errc::invalid_argument, "attacker index out of range");
    if (scheme == RewardScheme::linear)
        return t[i] / profile.theta();
    double sum_sq = 0.0;
    for (double tj : t) sum_sq += tj * tj;
    return t[i] * t[i] / sum_sq;
}

double cost(double effort, const GameParams& params) {
    if (!(effort >= 0.0) || !(effort < params.e_max))
        fail(Errc::effort_out_of_range, "effort must lie in [0, e_max)");
    return params.cost_factor * std::expm1(effort) / (params.e_max - effort);
}

double reward(RewardScheme scheme, const TypeProfile& profile, std::size_t i,
              double e_tot, const GameParams& params) {
    if (!(e_tot >= 0.0) || !(e_tot <= 1.0))
        fail(Errc::result_out_of_range, "attack result must lie in [0, 1]");
    const double pool = profile.bet_total(params.award) + params.award;
    return pool * reward_share(scheme, profile, i) * e_tot;
}

double attack_phase_utility(const TypeProfile& profile, std::size_t i,
                            double effort_i, double e_tot,
                            RewardScheme scheme, const GameParams& params) {
    if (!(effort_i >= 0.0) || !(effort_i < params.e_max))
        fail(Errc::effort_out_of_range, "effort must lie in [0, e_max)");
    if (e_tot < effort_i)
        fail(Errc::result_out_of_range, "total effort below own effort");
    const double realized = std::min(e_tot, 1.0);
    return reward(scheme, profile, i, realized, params) - cost(effort_i, params) -
           profile.bet(i, params.award);
}

} // namespace csim
