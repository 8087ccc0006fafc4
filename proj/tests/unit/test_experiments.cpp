#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "csim/experiments.hpp"

using namespace csim;

namespace {

bool throws_config_error(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == Errc::config_error;
    }
    return false;
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const char* stem) {
        path = std::filesystem::temp_directory_path() / stem;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::string file(const char* name, const std::string& body) const {
        const auto p = path / name;
        std::ofstream out(p);
        out << body;
        return p.string();
    }
};

} // namespace

TEST_CASE("rng streams are deterministic and distinct") {
    Rng a(42, 7);
    Rng b(42, 7);
    Rng c(42, 8);
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) diverged = true;
    }
    CHECK(diverged);

    Rng d(1, 2);
    for (int i = 0; i < 1000; ++i) {
        const double u = d.uniform(-2.0, 3.0);
        CHECK(u >= -2.0);
        CHECK(u < 3.0);
    }
}

TEST_CASE("format_value") {
    CHECK(format_value(0.5) == "0.5");
    CHECK(format_value(-1.0) == "-1");
    CHECK(format_value(1.0 / 3.0) == "0.333333333333");
    CHECK(format_value(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_value(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_value(std::nan("")) == "nan");
}

TEST_CASE("config parsing fills every field") {
    const ScenarioConfig cfg = ScenarioConfig::parse(
        "# comment\n"
        "\n"
        "n = 12\n"
        "award = 200\n"
        "e_max = 2.5\n"
        "fee_delta = 0.2\n"
        "gamma = 0.4\n"
        "scheme = square\n"
        "theta = 0.9\n"
        "bet_spread = 5\n"
        "replicates = 7\n"
        "seed = 99\n"
        "ir_rule = withdrawal\n"
        "sweep = theta:0.5:1.5:3\n"
        "gamma_values = 0.3, 0.4\n");
    CHECK(cfg.n == 12);
    CHECK(cfg.award == 200.0);
    CHECK(cfg.e_max == 2.5);
    CHECK(cfg.fee_delta == 0.2);
    REQUIRE(cfg.gamma.has_value());
    CHECK(*cfg.gamma == 0.4);
    CHECK_FALSE(cfg.cost_factor.has_value());
    CHECK(cfg.scheme == RewardScheme::square);
    CHECK(cfg.theta == 0.9);
    CHECK(cfg.bet_spread == 5.0);
    CHECK(cfg.replicates == 7);
    CHECK(cfg.seed == 99);
    CHECK(cfg.ir_rule == IrRule::withdrawal);
    REQUIRE(cfg.sweep_axis.has_value());
    CHECK(cfg.sweep_axis->parameter == "theta");
    REQUIRE(cfg.sweep_axis->values.size() == 3);
    CHECK(cfg.sweep_axis->values[0] == 0.5);
    CHECK(cfg.sweep_axis->values[1] == 1.0);
    CHECK(cfg.sweep_axis->values[2] == 1.5);
    CHECK(cfg.gamma_values == std::vector<double>{0.3, 0.4});

    const ScenarioConfig defaults = ScenarioConfig::parse("");
    CHECK(defaults.n == 30);
    CHECK(defaults.award == 100.0);
    CHECK(defaults.scheme == RewardScheme::linear);
    CHECK(defaults.ir_rule == IrRule::literal);
    CHECK_FALSE(defaults.sweep_axis.has_value());
    CHECK(defaults.params().gamma == 0.35);

    const ScenarioConfig listed = ScenarioConfig::parse("sweep = n:5,10,30\n");
    REQUIRE(listed.sweep_axis.has_value());
    CHECK(listed.sweep_axis->parameter == "n");
    CHECK(listed.sweep_axis->values == std::vector<double>{5.0, 10.0, 30.0});

    const ScenarioConfig explicit_bets =
        ScenarioConfig::parse("bets = 10, 20, 30\ntheta = 0.6\n");
    REQUIRE(explicit_bets.bets.has_value());
    CHECK(explicit_bets.bets->size() == 3);
}

TEST_CASE("config parse and validation errors") {
    CHECK(throws_config_error([] { ScenarioConfig::parse("nonsense\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("mystery = 1\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("n =\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("n = 2.5\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("theta = 1x\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("seed = -5\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("scheme = cubic\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("ir_rule = maybe\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::parse("gamma = 0.3\ncost_factor = 10\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("sweep = theta\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::parse("sweep = voltage:0:1:5\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::parse("sweep = theta:1.0,0.5\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::parse("sweep = theta:0:1:0\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::parse("sweep = theta:0:1:2:3\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("replicates = 0\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("e_max = 1\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("theta = 0\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("bets = \n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("bets = 1,,2\n"); }));
    CHECK(throws_config_error([] { ScenarioConfig::parse("bets = 0,1\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::parse("bets = 1,2\nsweep = n:2,4\n"); }));
    CHECK(throws_config_error(
        [] { ScenarioConfig::load("/nonexistent/path.cfg"); }));
}

TEST_CASE("ir threshold follows the configured rule") {
    ScenarioConfig cfg;
    const GameParams params = cfg.params();
    CHECK(cfg.ir_threshold(params) == doctest::Approx(0.2));
    cfg.ir_rule = IrRule::withdrawal;
    CHECK(cfg.ir_threshold(params) == doctest::Approx(-0.2));
}

TEST_CASE("sampled bets hit the theta target exactly") {
    ScenarioConfig cfg;
    cfg.n = 30;
    cfg.theta = 1.2;

    const TypeProfile profile = sample_bets(cfg, 3);
    CHECK(profile.size() == 30);
    CHECK(std::abs(profile.theta() - 1.2) <= 1e-12);
    CHECK(std::abs(profile.bet_total(cfg.award) - 120.0) <= 1e-9);

    // same replicate, same draw; different replicate, different draw
    const TypeProfile again = sample_bets(cfg, 3);
    CHECK(profile.types() == again.types());
    const TypeProfile other = sample_bets(cfg, 4);
    CHECK(profile.types() != other.types());

    // the target theta rescales the same raw draw
    ScenarioConfig wide = cfg;
    wide.theta = 0.6;
    const TypeProfile scaled = sample_bets(wide, 3);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(scaled.type(i) == doctest::Approx(profile.type(i) * 0.5));
}

TEST_CASE("bet spread bounds the stake ratio") {
    ScenarioConfig cfg;
    cfg.n = 30;
    cfg.bet_spread = 10.0;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const TypeProfile profile = sample_bets(cfg, rep);
        const auto [lo, hi] = std::minmax_element(profile.types().begin(),
                                                  profile.types().end());
        const double ratio = *hi / *lo;
        CHECK(ratio < 10.0);
        worst = std::max(worst, ratio);
    }
    CHECK(worst > 5.0);
}

TEST_CASE("explicit bets rescale like sampled ones") {
    ScenarioConfig cfg;
    cfg.bets = std::vector<double>{10.0, 20.0, 30.0};
    cfg.theta = 0.6; // factor 1: bets already sum to 60
    const TypeProfile profile = sample_bets(cfg, 17);
    CHECK(profile.types() == std::vector<double>{0.1, 0.2, 0.3});

    cfg.theta = 1.2;
    const TypeProfile doubled = sample_bets(cfg, 0);
    CHECK(doubled.type(2) == doctest::Approx(0.6));

    cfg.theta = 2.4; // top bet would hit 120 > award
    CHECK(throws_config_error([&] { sample_bets(cfg, 0); }));
}

TEST_CASE("sweep without an axis reduces to the configured scenario") {
    ScenarioConfig cfg;
    cfg.bets = std::vector<double>{10.0, 20.0, 30.0};
    cfg.theta = 0.6;
    cfg.scheme = RewardScheme::square;
    cfg.replicates = 5;

    const std::vector<SweepRow> rows = sweep(cfg);
    REQUIRE(rows.size() == 1);
    const SweepRow& row = rows[0];
    CHECK(row.parameter == "none");
    CHECK(row.value == 0.0);
    CHECK(row.replicates == 5);
    CHECK(row.seed == cfg.seed);

    // explicit bets make every replicate identical, so the means equal one
    // replicate computed by hand
    const TypeProfile profile = sample_bets(cfg, 0);
    const GameParams params = cfg.params();
    const Solution sol = solve(profile, cfg.scheme, params);
    double pay_sum = 0.0, cost_sum = 0.0, qu_sum = 0.0;
    int ir_pass = 0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        pay_sum += sol.outcome.payments[i];
        const double c = cost(sol.equilibrium.efforts[i], params);
        cost_sum += c;
        const double qu = sol.outcome.payments[i] - c - params.fee_delta;
        qu_sum += qu;
        if (qu >= cfg.ir_threshold(params) - currency_tol) ++ir_pass;
    }
    CHECK(std::abs(row.mean_attack_result - sol.outcome.attack_result) <= 1e-12);
    CHECK(std::abs(row.mean_payment_over_award - pay_sum / params.award) <= 1e-12);
    CHECK(std::abs(row.mean_fairness_rms -
                   fairness_score(profile, cfg.scheme, params)) <= 1e-12);
    CHECK(std::abs(row.mean_total_cost_over_award - cost_sum / params.award) <=
          1e-12);
    CHECK(std::abs(row.mean_profit_over_mean_bet -
                   qu_sum / profile.bet_total(params.award)) <= 1e-12);
    CHECK(row.ir_pass_fraction == doctest::Approx(ir_pass / 3.0));
}

TEST_CASE("theta sweep is monotone under common random numbers") {
    ScenarioConfig cfg;
    cfg.n = 30;
    cfg.replicates = 5;
    cfg.sweep_axis = SweepAxis{"theta", {0.5, 1.0, 1.5, 2.0}};

    for (const RewardScheme scheme :
         {RewardScheme::linear, RewardScheme::square}) {
        cfg.scheme = scheme;
        const std::vector<SweepRow> rows = sweep(cfg);
        REQUIRE(rows.size() == 4);
        for (std::size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i].mean_attack_result >=
                  rows[i - 1].mean_attack_result - 1e-12);
        CHECK(rows.back().mean_attack_result > rows.front().mean_attack_result);
        CHECK(rows.back().mean_attack_result <= 1.0 + 1e-12);
    }
}

TEST_CASE("sweep output is identical across thread counts") {
    ScenarioConfig cfg;
    cfg.n = 8;
    cfg.replicates = 4;
    cfg.sweep_axis = SweepAxis{"theta", {0.6, 1.0, 1.4}};

    const auto render = [&](int threads) {
        std::ostringstream out;
        write_sweep_csv(out, cfg.scheme, sweep(cfg, threads));
        return out.str();
    };
    const std::string single = render(1);
    CHECK(single == render(1));
    CHECK(single == render(3));
    CHECK(single == render(8));
}

TEST_CASE("sweep csv format") {
    SweepRow row;
    row.parameter = "theta";
    row.value = 1.0;
    row.mean_attack_result = 0.5;
    row.mean_payment_over_award = 0.25;
    row.mean_fairness_rms = 1.5;
    row.ir_pass_fraction = 0.75;
    row.mean_total_cost_over_award = 0.1;
    row.mean_profit_over_mean_bet = std::numeric_limits<double>::infinity();
    row.replicates = 50;
    row.seed = 7;

    std::ostringstream out;
    write_sweep_csv(out, RewardScheme::square, {row});
    CHECK(out.str() ==
          "scheme,parameter,value,mean_attack_result,mean_payment_over_award,"
          "mean_fairness_rms,ir_pass_fraction,mean_total_cost_over_award,"
          "mean_profit_over_mean_bet,replicates,seed\n"
          "square,theta,1,0.5,0.25,1.5,0.75,0.1,inf,50,7\n");
}

TEST_CASE("gamma sweep respects the axis override") {
    ScenarioConfig cfg;
    cfg.n = 6;
    cfg.replicates = 3;
    cfg.cost_factor = 25.0; // overridden by the axis
    cfg.sweep_axis = SweepAxis{"gamma", {0.3, 0.5}};

    const std::vector<SweepRow> rows = sweep(cfg);
    REQUIRE(rows.size() == 2);
    // cheaper traffic yields at least as much attack result
    CHECK(rows[0].mean_attack_result >= rows[1].mean_attack_result - 1e-12);
}

TEST_CASE("distributed effort is cheaper than one attacker producing it") {
    // cost is convex with cost(0) = 0, so it is superadditive: the crowd's
    // bill never exceeds a solo attacker's bill for the same raw total. Past
    // raw_total >= e_max the crowd generates traffic no single attacker
    // could produce at any price.
    ScenarioConfig cfg;
    cfg.n = 30;
    bool saw_unreachable = false;
    for (const RewardScheme scheme :
         {RewardScheme::linear, RewardScheme::square}) {
        for (const double theta : {0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}) {
            cfg.scheme = scheme;
            cfg.theta = theta;
            const GameParams params = cfg.params();
            for (int rep = 0; rep < 3; ++rep) {
                const TypeProfile profile = sample_bets(cfg, rep);
                const Equilibrium eq = attack_result(profile, scheme, params);
                double total = 0.0;
                for (double e : eq.efforts) total += cost(e, params);
                if (eq.raw_total < params.e_max)
                    CHECK(total <= cost(eq.raw_total, params) + 1e-9);
                else
                    saw_unreachable = true;
            }
        }
    }
    CHECK(saw_unreachable);
}

TEST_CASE("solve report is valid json with consistent settlement") {
    ScenarioConfig cfg;
    cfg.n = 5;
    cfg.scheme = RewardScheme::square;
    const std::string text = solve_report(cfg);
    const nlohmann::json j = nlohmann::json::parse(text);

    CHECK(j.at("scheme") == "square");
    CHECK(j.at("seed") == cfg.seed);
    CHECK(j.at("params").at("award") == 100.0);
    CHECK(j.at("profile").at("types").size() == 5);
    CHECK(j.at("equilibrium").at("efforts").size() == 5);
    CHECK(j.at("settlement").at("payments").size() == 5);
    CHECK(j.at("settlement").at("budget_ok") == true);
    CHECK(j.at("settlement").at("ir_pass").size() == 5);

    const double theta = j.at("profile").at("theta").get<double>();
    const double ar = j.at("equilibrium").at("attack_result").get<double>();
    const double total = j.at("settlement").at("total_payments").get<double>();
    const double bet_total = theta * 100.0;
    CHECK(std::abs(total - ((bet_total + 100.0) * ar - bet_total)) <= 1e-9);
    CHECK(std::abs(j.at("settlement").at("sponsor_residual").get<double>() -
                   (100.0 - total)) <= 1e-9);
}

TEST_CASE("figure suite renders every panel") {
    const TempDir cfg_dir("csim_test_figcfg");
    const TempDir out_dir("csim_test_figout");
    cfg_dir.file("fig3.cfg",
                 "n = 6\nreplicates = 2\ngamma = 0.35\n"
                 "sweep = theta:0.8:1.2:3\n");
    cfg_dir.file("fig4.cfg",
                 "n = 6\nreplicates = 2\nsweep = theta:0.8:1.2:2\n"
                 "gamma_values = 0.35, 0.5\n");
    cfg_dir.file("fig5_cost.cfg",
                 "n = 6\nreplicates = 2\nsweep = theta:0.8:1.2:2\n"
                 "gamma_values = 0.35, 0.5\n");
    cfg_dir.file("fig5_n.cfg",
                 "replicates = 2\ntheta = 1.0\nsweep = n:3,6\n");

    const std::vector<std::string> written =
        figure_suite(cfg_dir.path.string(), out_dir.path.string(), 2);
    REQUIRE(written.size() == 7);

    const auto read_lines = [](const std::string& path) {
        std::ifstream in(path);
        REQUIRE(in.good());
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        return lines;
    };

    const auto fig3a = read_lines((out_dir.path / "fig3a.csv").string());
    REQUIRE(fig3a.size() == 4); // header + 3 theta points
    CHECK(fig3a[0] == "theta,attack_result_linear,attack_result_square");
    CHECK(fig3a[1].rfind("0.8,", 0) == 0);

    CHECK(read_lines((out_dir.path / "fig3b.csv").string())[0] ==
          "theta,payment_share_linear,payment_share_square");
    CHECK(read_lines((out_dir.path / "fig3c.csv").string())[0] ==
          "theta,fairness_rms_linear,fairness_rms_square");

    const auto fig4a = read_lines((out_dir.path / "fig4a.csv").string());
    REQUIRE(fig4a.size() == 5); // header + 2 gammas x 2 thetas
    CHECK(fig4a[0] == "gamma,theta,attack_result_linear,attack_result_square");

    const auto fig4b = read_lines((out_dir.path / "fig4b.csv").string());
    REQUIRE(fig4b.size() == 5);
    CHECK(fig4b[0] == "gamma,theta,profit_ratio_linear,ir_fraction_linear,"
                      "profit_ratio_square,ir_fraction_square");

    const auto fig5c = read_lines((out_dir.path / "fig5_cost.csv").string());
    REQUIRE(fig5c.size() == 5);
    CHECK(fig5c[0] ==
          "gamma,theta,total_cost_over_award_linear,total_cost_over_award_square");

    const auto fig5n = read_lines((out_dir.path / "fig5_n.csv").string());
    REQUIRE(fig5n.size() == 3); // header + 2 n values
    CHECK(fig5n[0] == "n,attack_result_linear,attack_result_square");
    CHECK(fig5n[1].rfind("3,", 0) == 0);
    CHECK(fig5n[2].rfind("6,", 0) == 0);

    CHECK(throws_config_error([&] {
        figure_suite((cfg_dir.path / "missing").string(), out_dir.path.string());
    }));
}
