#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "csim/experiments.hpp"
#include "csim/model.hpp"

using namespace csim;

namespace {

bool throws_code(Errc expected, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == expected;
    }
    return false;
}

} // namespace

TEST_CASE("gamma calibration pins the cost factor") {
    const GameParams p = GameParams::from_gamma(100.0, 2.0, 0.35);
    CHECK(p.cost_factor == doctest::Approx(20.369184740426427).epsilon(1e-12));
    CHECK(cost(1.0, p) == doctest::Approx(0.35 * 100.0).epsilon(1e-12));

    const GameParams q = GameParams::from_cost_factor(100.0, 2.0, p.cost_factor);
    CHECK(q.gamma == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("params validation") {
    CHECK(throws_code(Errc::invalid_argument,
                      [] { GameParams::from_gamma(100.0, 1.0, 0.35); }));
    CHECK(throws_code(Errc::invalid_argument,
                      [] { GameParams::from_gamma(-5.0, 2.0, 0.35); }));
    CHECK(throws_code(Errc::invalid_argument,
                      [] { GameParams::from_gamma(100.0, 2.0, 0.0); }));
    GameParams broken = GameParams::from_gamma(100.0, 2.0, 0.35);
    broken.gamma = 0.2;
    CHECK(throws_code(Errc::invalid_argument, [&] { broken.validate(); }));
}

TEST_CASE("cost curve reference values and domain") {
    const GameParams p = GameParams::from_cost_factor(100.0, 2.0, 1.0);
    CHECK(cost(0.0, p) == 0.0);
    CHECK(cost(1.0, p) == doctest::Approx(1.7182818284590451).epsilon(1e-14));
    CHECK(throws_code(Errc::effort_out_of_range, [&] { cost(-0.1, p); }));
    CHECK(throws_code(Errc::effort_out_of_range, [&] { cost(2.0, p); }));
    CHECK(throws_code(Errc::effort_out_of_range, [&] { cost(2.5, p); }));
}

TEST_CASE("cost curve is increasing and convex") {
    const GameParams p = GameParams::from_gamma(100.0, 2.0, 0.4);
    Rng rng(11, 0);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(0.0, 1.9);
        const double b = rng.uniform(0.0, 1.9);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(cost(hi, p) >= cost(lo, p));
        const double mid = 0.5 * (lo + hi);
        CHECK(cost(mid, p) <= 0.5 * (cost(lo, p) + cost(hi, p)) + 1e-12);
    }
}

TEST_CASE("normalize_types validates bets") {
    const TypeProfile profile = normalize_types({10.0, 30.0, 60.0}, 100.0);
    CHECK(profile.size() == 3);
    CHECK(profile.type(0) == doctest::Approx(0.1));
    CHECK(profile.type(2) == doctest::Approx(0.6));
    CHECK(profile.theta() == doctest::Approx(1.0));
    CHECK(profile.bet(1, 100.0) == doctest::Approx(30.0));
    CHECK(profile.bet_total(100.0) == doctest::Approx(100.0));

    CHECK(throws_code(Errc::non_positive_bet,
                      [] { normalize_types({10.0, 0.0}, 100.0); }));
    CHECK(throws_code(Errc::non_positive_bet,
                      [] { normalize_types({10.0, -3.0}, 100.0); }));
    CHECK(throws_code(Errc::bet_exceeds_award,
                      [] { normalize_types({10.0, 100.0}, 100.0); }));
    CHECK(throws_code(Errc::bet_exceeds_award,
                      [] { normalize_types({150.0}, 100.0); }));
}

TEST_CASE("reward shares") {
    const TypeProfile profile = normalize_types({10.0, 30.0, 60.0}, 100.0);
    CHECK(reward_share(RewardScheme::linear, profile, 0) == doctest::Approx(0.1));
    CHECK(reward_share(RewardScheme::linear, profile, 2) == doctest::Approx(0.6));
    CHECK(reward_share(RewardScheme::square, profile, 0) ==
          doctest::Approx(0.021739130434782615).epsilon(1e-12));
    CHECK(reward_share(RewardScheme::square, profile, 2) ==
          doctest::Approx(0.78260869565217395).epsilon(1e-12));

    Rng rng(17, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 12);
        std::vector<double> types;
        for (int i = 0; i < n; ++i) types.push_back(rng.uniform(0.01, 0.9));
        const TypeProfile prof{types};
        for (RewardScheme s : {RewardScheme::linear, RewardScheme::square}) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                const double share =
                    reward_share(s, prof, static_cast<std::size_t>(i));
                CHECK(share >= 0.0);
                CHECK(share <= 1.0);
                sum += share;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("reward pays the full pool at a complete attack") {
    const GameParams p = GameParams::from_gamma(100.0, 2.0, 0.35);
    const TypeProfile profile = normalize_types({12.0, 20.0, 41.0}, 100.0);
    for (RewardScheme s : {RewardScheme::linear, RewardScheme::square}) {
        double sum = 0.0;
        for (std::size_t i = 0; i < profile.size(); ++i)
            sum += reward(s, profile, i, 1.0, p);
        CHECK(sum == doctest::Approx(profile.bet_total(100.0) + 100.0)
                         .epsilon(1e-12));
    }
    CHECK(reward(RewardScheme::linear, profile, 0, 0.0, p) == 0.0);
    CHECK(throws_code(Errc::result_out_of_range, [&] {
        reward(RewardScheme::linear, profile, 0, 1.5, p);
    }));
    CHECK(throws_code(Errc::result_out_of_range, [&] {
        reward(RewardScheme::linear, profile, 0, -0.1, p);
    }));
}

TEST_CASE("linear rewards are additive under a stake split") {
    const GameParams p = GameParams::from_gamma(100.0, 2.0, 0.35);
    Rng rng(23, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const double t = rng.uniform(0.05, 0.8);
        const double cut = rng.uniform(0.1, 0.9);
        const double other = rng.uniform(0.05, 0.8);
        const TypeProfile whole{{t, other}};
        const TypeProfile parts{{t * cut, t * (1.0 - cut), other}};
        const double e_tot = rng.uniform(0.0, 1.0);
        const double lhs = reward(RewardScheme::linear, whole, 0, e_tot, p);
        const double rhs = reward(RewardScheme::linear, parts, 0, e_tot, p) +
                           reward(RewardScheme::linear, parts, 1, e_tot, p);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("attack-phase utility saturates at a complete attack") {
    const GameParams p = GameParams::from_gamma(100.0, 2.0, 0.35);
    const TypeProfile profile = normalize_types({10.0, 30.0, 60.0}, 100.0);
    const double at_one =
        attack_phase_utility(profile, 1, 0.4, 1.0, RewardScheme::linear, p);
    const double beyond =
        attack_phase_utility(profile, 1, 0.4, 1.7, RewardScheme::linear, p);
    CHECK(at_one == beyond);

    const double below =
        attack_phase_utility(profile, 1, 0.4, 0.8, RewardScheme::linear, p);
    CHECK(below < at_one);

    CHECK(throws_code(Errc::effort_out_of_range, [&] {
        attack_phase_utility(profile, 1, -0.1, 0.5, RewardScheme::linear, p);
    }));
    CHECK(throws_code(Errc::result_out_of_range, [&] {
        attack_phase_utility(profile, 1, 0.6, 0.5, RewardScheme::linear, p);
    }));
}
