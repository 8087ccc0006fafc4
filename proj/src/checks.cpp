#include "csim/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "csim/contract.hpp"
#include "csim/equilibrium.hpp"
#include "csim/experiments.hpp"
#include "csim/mechanism.hpp"
#include "csim/model.hpp"
#include "math_detail.hpp"

namespace csim {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_value(v); }

struct Collector {
    bool pass = true;
    std::string first_failure;
    long failures = 0;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        ++failures;
        if (first_failure.empty()) first_failure = what;
    }
};

CheckResult finish(const std::string& id, const std::string& name,
                   Collector& c, Clock::time_point t0, std::string detail) {
    CheckResult r;
    r.id = id;
    r.name = name;
    r.seconds = elapsed_s(t0);
    r.pass = c.pass;
    if (!c.pass)
        detail = std::to_string(c.failures) + " failure(s); first: " +
                 c.first_failure;
    r.detail = detail;
    return r;
}

// Valid random profile with theta in [0.2, theta_cap(n)]: raw stakes
// Uniform(1,10) scaled to the drawn theta; the cap keeps every type < 1.
TypeProfile draw_profile(Rng& rng, int n, double* theta_out = nullptr) {
    const double theta_hi =
        std::min(2.0, 0.95 * (9.0 + static_cast<double>(n)) / 10.0);
    const double theta = rng.uniform(0.2, theta_hi);
    std::vector<double> raw(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& u : raw) {
        u = rng.uniform(1.0, 10.0);
        total += u;
    }
    for (double& u : raw) u *= theta / total;
    if (theta_out) *theta_out = theta;
    return TypeProfile(raw);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::config_error, "cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

bool cells_match(const std::string& a, const std::string& b) {
    if (a == b) return true;
    try {
        std::size_t pa = 0, pb = 0;
        const double va = std::stod(a, &pa);
        const double vb = std::stod(b, &pb);
        if (pa != a.size() || pb != b.size()) return false;
        return std::abs(va - vb) <= 1e-9 * std::max(1.0, std::abs(vb));
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace

// Criterion 1: settlement conservation. 1000 random profiles per scheme,
// n in {1,2,5,30}, theta in [0.2,2], gamma in [0.3,0.5]: payments never
// exceed the award, match the pool identity, and respect the stake floor.
CheckResult check_budget_balance(const CheckOptions&) {
    const auto t0 = Clock::now();
    Collector c;
    Rng rng(0xb0d6e7, 1);
    const int ns[] = {1, 2, 5, 30};
    double worst_slack = std::numeric_limits<double>::infinity();
    double worst_identity = 0.0;
    for (RewardScheme scheme : {RewardScheme::linear, RewardScheme::square}) {
        for (int rep = 0; rep < 1000; ++rep) {
            const int n = ns[rng.next_u64() % 4];
            const TypeProfile profile = draw_profile(rng, n);
            const double gamma = rng.uniform(0.3, 0.5);
            const GameParams params = GameParams::from_gamma(100.0, 2.0, gamma);
            const Outcome out = payments(profile, scheme, params);

            double sum = 0.0;
            for (double p : out.payments) sum += p;
            const double bet_t = profile.bet_total(params.award);
            const double identity =
                (bet_t + params.award) * out.attack_result - bet_t;

            worst_slack = std::min(worst_slack, params.award - sum);
            worst_identity = std::max(worst_identity, std::abs(sum - identity));
            c.require(sum <= params.award + 1e-9,
                      std::string(to_string(scheme)) + " rep " +
                          std::to_string(rep) + ": payout exceeds award by " +
                          fmt(sum - params.award));
            c.require(std::abs(sum - identity) <= 1e-9,
                      std::string(to_string(scheme)) + " rep " +
                          std::to_string(rep) + ": pool identity off by " +
                          fmt(sum - identity));
            for (std::size_t i = 0; i < profile.size(); ++i)
                c.require(out.payments[i] >=
                              -profile.bet(i, params.award) - 1e-9,
                          std::string(to_string(scheme)) + " rep " +
                              std::to_string(rep) + ": payment below -bet");
        }
    }
    c.require(elapsed_s(t0) < 10.0, "runtime exceeded 10 s");
    return finish("budget-balance", "payments bounded by award, pool identity",
                  c, t0,
                  "2000 profiles; min slack " + fmt(worst_slack) +
                      ", max identity gap " + fmt(worst_identity));
}

// Criterion 2: splitting a stake over k sybil identities costs exactly the
// extra transaction fees under the linear scheme, and nothing when fees are
// zero.
CheckResult check_strategy_proofness(const CheckOptions&) {
    const auto t0 = Clock::now();
    Collector c;
    Rng rng(0x5eed5, 2);
    const int ns[] = {2, 5, 30};
    double worst_gap = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const int n = ns[rng.next_u64() % 3];
        const TypeProfile profile = draw_profile(rng, n);
        const double gamma = rng.uniform(0.3, 0.5);
        const auto i = static_cast<std::size_t>(rng.next_u64() %
                                                static_cast<std::uint64_t>(n));
        const double t_i = profile.type(i);
        for (double fee : {0.1, 0.0}) {
            const GameParams params = GameParams::from_gamma(100.0, 2.0, gamma, fee);
            for (int k = 2; k <= 5; ++k) {
                for (bool equal : {true, false}) {
                    std::vector<double> split(static_cast<std::size_t>(k));
                    if (equal) {
                        for (double& part : split)
                            part = t_i / static_cast<double>(k);
                    } else {
                        double wsum = 0.0;
                        for (double& part : split) {
                            part = rng.uniform(0.1, 1.1);
                            wsum += part;
                        }
                        for (double& part : split) part *= t_i / wsum;
                    }
                    const SplitReport report = check_dsic_split(
                        profile, i, split, RewardScheme::linear, params);
                    const double expected = (k - 1) * fee;
                    const double err = std::abs(report.delta_gap - expected);
                    worst_gap = std::max(worst_gap, err);
                    c.require(err <= 1e-9,
                              "rep " + std::to_string(rep) + " k=" +
                                  std::to_string(k) + (equal ? " equal" : " random") +
                                  " fee=" + fmt(fee) + ": gap " +
                                  fmt(report.delta_gap) + " expected " +
                                  fmt(expected));
                }
            }
        }
    }
    return finish("strategy-proofness",
                  "linear sybil split gap equals (k-1)*fee", c, t0,
                  "200 profiles x k in {2..5} x {equal,random} x fee {0.1,0}; "
                  "max deviation " + fmt(worst_gap));
}

// Criterion 3: the solver's effort maximizes the attack-phase objective on a
// 1e-5 grid, and the argmax ignores opponent efforts.
CheckResult check_dominance(const CheckOptions&) {
    const auto t0 = Clock::now();
    Collector c;
    Rng rng(0xd0317a7e, 3);
    int interior = 0, boundary = 0;
    double worst_offset = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const double theta = rng.uniform(0.2, 2.0);
        const double phi = rng.uniform(0.0, 1.0);
        const double t0_type = theta <= 1.0
                                   ? theta * (0.01 + 0.97 * phi)
                                   : 0.01 + 0.97 * phi;
        const double rest = theta - t0_type;
        std::vector<double> types = {t0_type};
        double wsum = 0.0;
        double w[3];
        for (double& wi : w) {
            wi = rng.uniform(0.8, 1.2);
            wsum += wi;
        }
        for (double wi : w) types.push_back(rest * wi / wsum);
        const TypeProfile profile{std::move(types)};
        const GameParams params =
            GameParams::from_gamma(100.0, 2.0, rng.uniform(0.3, 0.5));

        std::vector<std::vector<double>> opponents(100,
                                                   std::vector<double>(3));
        for (auto& row : opponents)
            for (double& e : row) e = rng.uniform(0.0, 1.0);

        const double mr = marginal_reward(RewardScheme::linear, profile, 0, params);
        const double e_star = best_response(mr, params);
        const bool is_interior = e_star > 0.0 && e_star < 1.0;
        (is_interior ? interior : boundary) += 1;

        const DominanceReport report =
            verify_dominance(profile, RewardScheme::linear, params, 0, e_star,
                             opponents, 1e-5);
        worst_offset =
            std::max(worst_offset, std::abs(report.grid_argmax - e_star));
        c.require(report.dominant, "rep " + std::to_string(rep) +
                                       ": solver effort beaten by grid, gain " +
                                       fmt(report.max_gain));
        c.require(std::abs(report.grid_argmax - e_star) <= 1e-4,
                  "rep " + std::to_string(rep) + ": argmax " +
                      fmt(report.grid_argmax) + " vs solver " + fmt(e_star));
        c.require(report.argmax_spread <= 1e-4,
                  "rep " + std::to_string(rep) + ": argmax moved " +
                      fmt(report.argmax_spread) + " across opponents");

        if (is_interior && e_star > 0.15 && e_star < 0.85) {
            const double off = e_star + (e_star < 0.5 ? 0.1 : -0.1);
            const DominanceReport bad = verify_dominance(
                profile, RewardScheme::linear, params, 0, off, opponents, 1e-5);
            c.require(!bad.dominant, "rep " + std::to_string(rep) +
                                         ": perturbed effort not rejected");
        }
    }
    c.require(interior >= 10, "too few interior draws to be meaningful");
    return finish("dominance",
                  "best response = grid argmax, opponent-independent", c, t0,
                  "100 draws x 100 opponent vectors, grid 1e-5; " +
                      std::to_string(interior) + " interior / " +
                      std::to_string(boundary) + " boundary; max |argmax-e*| " +
                      fmt(worst_offset));
}

// Criterion 4: first-order condition residuals, boundary clamps and the
// finite-difference consistency of the marginal cost.
CheckResult check_solver(const CheckOptions&) {
    const auto t0 = Clock::now();
    Collector c;
    Rng rng(0x501e3, 4);
    double worst_resid = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        const double e_max = rng.uniform(1.2, 3.0);
        const double gamma = rng.uniform(0.3, 0.5);
        const GameParams params = GameParams::from_gamma(100.0, e_max, gamma);
        const double mc0 = marginal_cost(0.0, params);
        const double mc1 = marginal_cost(1.0, params);

        const double u = rng.uniform(1e-6, 1.0 - 1e-6);
        const double mr = mc0 + u * (mc1 - mc0);
        const double e = best_response(mr, params);
        c.require(e > 0.0 && e < 1.0, "interior draw clamped");
        const double resid = std::abs(marginal_cost(e, params) - mr);
        const double bound = 1e-8 * std::max(1.0, mr);
        worst_resid = std::max(worst_resid, resid / bound);
        c.require(resid <= bound, "rep " + std::to_string(rep) +
                                      ": residual " + fmt(resid) + " > " +
                                      fmt(bound));

        c.require(best_response(mc0 * rng.uniform(0.0, 1.0), params) == 0.0,
                  "below-threshold reward must give zero effort");
        c.require(best_response(mc1 * rng.uniform(1.0, 2.0), params) == 1.0,
                  "above-threshold reward must clamp to 1");
    }
    for (int rep = 0; rep < 100; ++rep) {
        const double e_max = rng.uniform(1.5, 3.0);
        const GameParams params =
            GameParams::from_gamma(100.0, e_max, rng.uniform(0.3, 0.5));
        const double e = rng.uniform(0.05, std::min(1.5, e_max - 0.2));
        const double mc = marginal_cost(e, params);
        auto fd_err = [&](double h) {
            const double fd =
                (cost(e + h, params) - cost(e - h, params)) / (2.0 * h);
            return std::abs(fd - mc);
        };
        const double err1 = fd_err(1e-3);
        const double err2 = fd_err(5e-4);
        c.require(err2 <= err1 / 3.0 + 1e-9 * std::max(1.0, mc),
                  "finite-difference order: err(h/2)=" + fmt(err2) +
                      " err(h)=" + fmt(err1));
    }
    return finish("solver",
                  "first-order residuals, clamps, fd convergence", c, t0,
                  "1e4 interior draws; worst residual at " + fmt(worst_resid) +
                      "x bound; 2e4 boundary draws; 100 fd points");
}

namespace {

struct Fig3Data {
    std::vector<SweepRow> linear;
    std::vector<SweepRow> square;
};

Fig3Data run_fig3(const CheckOptions& options) {
    const auto cfg = ScenarioConfig::load(
        (std::filesystem::path(options.config_dir) / "fig3.cfg").string());
    Fig3Data data;
    ScenarioConfig lin = cfg;
    lin.scheme = RewardScheme::linear;
    data.linear = sweep(lin, options.threads);
    ScenarioConfig sq = cfg;
    sq.scheme = RewardScheme::square;
    data.square = sweep(sq, options.threads);
    return data;
}

std::optional<std::size_t> saturation_index(const std::vector<SweepRow>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].mean_attack_result >= 0.99) return i;
    return std::nullopt;
}

} // namespace

// Criterion 5: the stake-ratio sweep reproduces the reference trends --
// attack result rises with theta, the square scheme's payout share rises
// until saturation, fairness degrades once effort saturates -- plus the
// theta=1 anchors, within 60 s, and the shipped defaults match the frozen
// CSVs.
CheckResult check_figure_trends(const CheckOptions& options) {
    const auto t0 = Clock::now();
    Collector c;
    const Fig3Data data = run_fig3(options);

    for (const auto* rows : {&data.linear, &data.square}) {
        const char* tag = rows == &data.linear ? "linear" : "square";
        for (std::size_t i = 1; i < rows->size(); ++i)
            c.require((*rows)[i].mean_attack_result >=
                          (*rows)[i - 1].mean_attack_result - 1e-12,
                      std::string(tag) + ": attack result fell at theta=" +
                          fmt((*rows)[i].value));
        c.require(rows->back().mean_attack_result >= 0.99,
                  std::string(tag) + ": attack result never saturated");

        const auto sat = saturation_index(*rows);
        c.require(sat.has_value(),
                  std::string(tag) + ": no saturation point on the grid");
        if (sat) {
            for (std::size_t i = *sat + 1; i < rows->size(); ++i)
                c.require((*rows)[i].mean_fairness_rms <=
                              (*rows)[i - 1].mean_fairness_rms + 1e-12,
                          std::string(tag) + ": fairness rms rose at theta=" +
                              fmt((*rows)[i].value));
            c.require(rows->back().mean_fairness_rms <
                          (*rows)[*sat].mean_fairness_rms,
                      std::string(tag) +
                          ": fairness rms did not drop past saturation");
        }
    }
    for (std::size_t i = 1; i < data.square.size(); ++i)
        c.require(data.square[i].mean_payment_over_award >=
                      data.square[i - 1].mean_payment_over_award - 1e-12,
                  "square: payout share fell at theta=" +
                      fmt(data.square[i].value));

    const auto anchor =
        std::find_if(data.square.begin(), data.square.end(), [](const SweepRow& r) {
            return std::abs(r.value - 1.0) < 1e-6;
        });
    c.require(anchor != data.square.end(), "theta=1 missing from the grid");
    std::string anchor_note;
    if (anchor != data.square.end()) {
        c.require(anchor->mean_attack_result >= 0.80 &&
                      anchor->mean_attack_result <= 1.00,
                  "square theta=1 attack result " +
                      fmt(anchor->mean_attack_result) + " outside [0.80, 1.00]");
        c.require(std::abs(anchor->mean_payment_over_award - 0.75) <= 0.15,
                  "square theta=1 payout share " +
                      fmt(anchor->mean_payment_over_award) +
                      " outside 0.75 +/- 0.15");
        anchor_note = "; theta=1 square ar " + fmt(anchor->mean_attack_result) +
                      ", share " + fmt(anchor->mean_payment_over_award);
    }

    std::string golden_note = "; golden skipped";
    if (options.compare_golden) {
        namespace fs = std::filesystem;
        const fs::path out =
            fs::temp_directory_path() /
            ("csim-figures-" +
             std::to_string(
                 std::chrono::steady_clock::now().time_since_epoch().count()));
        const auto written =
            figure_suite(options.config_dir, out.string(), options.threads);
        golden_note = "; golden ok";
        for (const auto& path : written) {
            const fs::path fresh(path);
            const fs::path golden =
                fs::path(options.golden_dir) / fresh.filename();
            if (!fs::exists(golden)) {
                c.require(false, "missing golden file " + golden.string());
                continue;
            }
            const auto a = read_csv(path);
            const auto b = read_csv(golden.string());
            c.require(a.size() == b.size(),
                      fresh.filename().string() + ": row count changed");
            for (std::size_t r = 0; r < std::min(a.size(), b.size()); ++r) {
                c.require(a[r].size() == b[r].size(),
                          fresh.filename().string() + ": column count changed");
                for (std::size_t k = 0; k < std::min(a[r].size(), b[r].size());
                     ++k)
                    c.require(cells_match(a[r][k], b[r][k]),
                              fresh.filename().string() + " row " +
                                  std::to_string(r) + " col " +
                                  std::to_string(k) + ": '" + a[r][k] +
                                  "' vs golden '" + b[r][k] + "'");
            }
        }
        fs::remove_all(out);
    }

    c.require(elapsed_s(t0) < 60.0, "runtime exceeded 60 s");
    return finish("figure-trends",
                  "theta sweep trends, anchors and frozen figure CSVs", c, t0,
                  "grid [" + fmt(data.square.front().value) + ", " +
                      fmt(data.square.back().value) + "] x " +
                      std::to_string(data.square.size()) + anchor_note +
                      golden_note);
}

// Criterion 6: the attack threshold theta*(gamma) is nondecreasing in the
// cost level, and the replicate-mean attack result at theta=1 is
// nonincreasing in the number of attackers.
CheckResult check_parameter_trends(const CheckOptions& options) {
    const auto t0 = Clock::now();
    Collector c;
    namespace fs = std::filesystem;
    const auto cfg4 = ScenarioConfig::load(
        (fs::path(options.config_dir) / "fig4.cfg").string());
    c.require(!cfg4.gamma_values.empty(), "fig4.cfg needs gamma_values");

    std::string note;
    for (RewardScheme scheme : {RewardScheme::linear, RewardScheme::square}) {
        double prev = -std::numeric_limits<double>::infinity();
        std::string thresholds;
        for (double g : cfg4.gamma_values) {
            ScenarioConfig cfg = cfg4;
            cfg.gamma = g;
            cfg.cost_factor.reset();
            cfg.scheme = scheme;
            const auto rows = sweep(cfg, options.threads);
            double theta_star = std::numeric_limits<double>::infinity();
            for (const auto& row : rows)
                if (row.mean_attack_result >= 0.99) {
                    theta_star = row.value;
                    break;
                }
            c.require(theta_star >= prev - 1e-12,
                      std::string(to_string(scheme)) + ": theta*(" + fmt(g) +
                          ")=" + fmt(theta_star) + " below theta* at lower gamma " +
                          fmt(prev));
            prev = theta_star;
            thresholds += (thresholds.empty() ? "" : "/") + fmt(theta_star);
        }
        note += std::string(note.empty() ? "" : "; ") + to_string(scheme) +
                " theta* " + thresholds;
    }

    const auto cfg_n = ScenarioConfig::load(
        (fs::path(options.config_dir) / "fig5_n.cfg").string());
    for (RewardScheme scheme : {RewardScheme::linear, RewardScheme::square}) {
        ScenarioConfig cfg = cfg_n;
        cfg.scheme = scheme;
        const auto rows = sweep(cfg, options.threads);
        for (std::size_t i = 1; i < rows.size(); ++i)
            c.require(rows[i].mean_attack_result <=
                          rows[i - 1].mean_attack_result + 1e-12,
                      std::string(to_string(scheme)) +
                          ": attack result rose from n=" + fmt(rows[i - 1].value) +
                          " to n=" + fmt(rows[i].value));
    }

    return finish("parameter-trends",
                  "theta*(gamma) nondecreasing, attack result nonincreasing in n",
                  c, t0, note);
}

// Criterion 7: fuzzed contract lifecycles conserve ledger value, settle
// exactly per the mechanism, and every guard rejects without state damage.
CheckResult check_contract_conservation(const CheckOptions&) {
    const auto t0 = Clock::now();
    Collector c;
    long settlements = 0, rejections = 0;

    for (int seq = 0; seq < 500; ++seq) {
        Rng rng(0xc077ac7, static_cast<std::uint64_t>(seq));
        const bool dyadic = seq % 2 == 0;
        auto q = [&](double x) {
            return dyadic ? std::round(x * 128.0) / 128.0 : x;
        };
        const double fee = dyadic ? 0.125 : 0.1;
        const int m = 1 + static_cast<int>(rng.next_u64() % 8);

        Ledger initial;
        const double award = q(rng.uniform(40.0, 150.0));
        initial.balances["sponsor"] = award + q(rng.uniform(1.0, 50.0));
        std::vector<std::string> accounts;
        for (int a = 0; a < m; ++a) {
            accounts.push_back("acct" + std::to_string(a));
            initial.balances[accounts.back()] = q(rng.uniform(5.0, 60.0));
        }

        ContractSim::Options options;
        options.fee_delta = fee;
        options.charge_fee_on_reject = seq % 3 == 0;
        ContractSim sim(std::move(initial), options);

        const double total0 = sim.total_value();
        bool settled = false;
        auto conserved = [&]() {
            const double drift = std::abs(sim.total_value() - total0);
            if (dyadic && !settled)
                c.require(drift == 0.0, "seq " + std::to_string(seq) +
                                            ": pre-settlement drift " + fmt(drift));
            else
                c.require(drift <= 1e-9, "seq " + std::to_string(seq) +
                                             ": ledger drift " + fmt(drift));
        };

        const double bet_min = q(rng.uniform(0.5, 2.0));
        sim.init("sponsor", award, "opaque-label", 100, 200, bet_min);
        conserved();

        std::map<std::string, double> committed;
        const int ops = 3 + static_cast<int>(rng.next_u64() % 10);
        for (int op = 0; op < ops; ++op) {
            const auto& account = accounts[rng.next_u64() % accounts.size()];
            const double balance = sim.ledger().balance(account);
            const double headroom =
                0.9 * award / static_cast<double>(m) - committed[account];
            const auto kind = rng.next_u64() % 8;
            const auto bettings_before = sim.state().bettings.size();
            const double escrow_before = sim.state().escrow;
            try {
                switch (kind) {
                case 0:
                case 1:
                case 2: { // plausible commit
                    const double cap = std::min(balance, headroom);
                    if (cap <= bet_min + 0.25) break;
                    const double bet = q(rng.uniform(bet_min + 0.125, cap));
                    if (!(bet > bet_min) || balance < bet) break;
                    sim.commit_bet(account, bet,
                                   static_cast<Tick>(rng.next_u64() % 100));
                    committed[account] += bet;
                    break;
                }
                case 3: { // after the window opened
                    sim.commit_bet(account, bet_min + 1.0,
                                   100 + static_cast<Tick>(rng.next_u64() % 50));
                    c.require(false, "late commit accepted");
                    break;
                }
                case 4: { // at or below bet_min
                    sim.commit_bet(account, bet_min * rng.uniform(0.1, 1.0), 10);
                    c.require(false, "dust commit accepted");
                    break;
                }
                case 5: { // more than the balance
                    sim.commit_bet(account, balance + 10.0, 10);
                    c.require(false, "overdraft commit accepted");
                    break;
                }
                case 6: { // attack phase before the window
                    sim.run_attack_phase(RewardScheme::linear,
                                         GameParams::from_gamma(award, 2.0, 0.35,
                                                                fee),
                                         50);
                    c.require(false, "early attack phase accepted");
                    break;
                }
                case 7: { // settlement before the window closes
                    sim.reward_allocation(std::nullopt, RewardScheme::linear,
                                          GameParams::from_gamma(award, 2.0, 0.35,
                                                                 fee),
                                          150);
                    c.require(false, "early settlement accepted");
                    break;
                }
                }
            } catch (const Error&) {
                ++rejections;
                c.require(sim.state().bettings.size() == bettings_before,
                          "rejection mutated the book");
                c.require(sim.state().escrow == escrow_before,
                          "rejection mutated the escrow");
            }
            conserved();
        }

        const GameParams params = GameParams::from_gamma(award, 2.0, 0.35, fee);
        const RewardScheme scheme =
            seq % 2 == 0 ? RewardScheme::linear : RewardScheme::square;
        const bool has_bets = !sim.state().bettings.empty();
        if (has_bets) {
            const DataFeed feed = sim.run_attack_phase(scheme, params, 120);
            conserved();

            DataFeed tampered = feed;
            tampered.tag ^= 0x1;
            try {
                sim.reward_allocation(tampered, scheme, params, 201);
                c.require(false, "tampered feed accepted");
            } catch (const Error& e) {
                c.require(e.code() == Errc::bad_signature,
                          "tampered feed rejected with wrong code");
            }
            conserved();

            const TypeProfile profile = sim.profile_from_bettings();
            const Outcome expected = payments(profile, scheme, params);
            const auto report = sim.reward_allocation(feed, scheme, params, 201);
            settled = true;
            ++settlements;
            conserved();
            c.require(report.rewards.size() == profile.size(),
                      "settlement dropped a bettor");
            for (std::size_t i = 0; i < report.rewards.size(); ++i) {
                const double net =
                    report.rewards[i].second - profile.bet(i, params.award);
                c.require(std::abs(net - expected.payments[i]) <= 1e-9,
                          "seq " + std::to_string(seq) + " bettor " +
                              std::to_string(i) + ": settled " + fmt(net) +
                              " vs mechanism " + fmt(expected.payments[i]));
            }
            c.require(sim.state().escrow == 0.0, "escrow not emptied");
            try {
                sim.reward_allocation(feed, scheme, params, 202);
                c.require(false, "double settlement accepted");
            } catch (const Error& e) {
                c.require(e.code() == Errc::already_settled,
                          "double settlement rejected with wrong code");
            }
        } else {
            const auto report =
                sim.reward_allocation(std::nullopt, scheme, params, 201);
            settled = true;
            c.require(std::abs(report.residual_to_owner - award) <= 1e-9,
                      "empty-book refund mismatch");
            conserved();
        }
    }

    return finish("contract-conservation",
                  "fuzzed lifecycles conserve value and settle per mechanism",
                  c, t0,
                  "500 sequences, " + std::to_string(settlements) +
                      " settlements, " + std::to_string(rejections) +
                      " guarded rejections");
}

// Criterion 8: identical inputs give byte-identical sweep CSVs, independent
// of the thread count.
CheckResult check_determinism(const CheckOptions& options) {
    const auto t0 = Clock::now();
    Collector c;
    const auto cfg = ScenarioConfig::load(
        (std::filesystem::path(options.config_dir) / "fig3.cfg").string());

    auto render = [&](int threads) {
        std::ostringstream out;
        write_sweep_csv(out, cfg.scheme, sweep(cfg, threads));
        return out.str();
    };
    const std::string first = render(1);
    c.require(render(1) == first, "second single-thread run differed");
    c.require(render(4) == first, "4-thread run differed");
    return finish("determinism", "sweep CSV byte-identical across runs/threads",
                  c, t0,
                  std::to_string(first.size()) + " bytes compared across 3 runs");
}

std::vector<CheckResult> run_all_checks(const CheckOptions& options) {
    return {
        check_budget_balance(options),     check_strategy_proofness(options),
        check_dominance(options),          check_solver(options),
        check_figure_trends(options),      check_parameter_trends(options),
        check_contract_conservation(options), check_determinism(options),
    };
}

} // namespace csim
