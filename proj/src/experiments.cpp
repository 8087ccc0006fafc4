#include "csim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "csim/kernels.hpp"

namespace csim {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

std::uint64_t Rng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            fail(Errc::config_error, "trailing characters in " + key);
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(Errc::config_error, "cannot parse number for " + key + ": '" + value +
                                     "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v))
        fail(Errc::config_error, key + " must be an integer");
    return static_cast<long>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            fail(Errc::config_error, "empty element in list for " + key);
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) fail(Errc::config_error, key + " list is empty");
    return out;
}

const std::vector<std::string>& axis_parameters() {
    static const std::vector<std::string> names = {"theta", "gamma",     "n",
                                                   "award", "fee_delta", "e_max"};
    return names;
}

// "param:from:to:steps" (inclusive grid) or "param:v1,v2,..." (explicit).
SweepAxis parse_axis(const std::string& value) {
    const auto colon = value.find(':');
    if (colon == std::string::npos)
        fail(Errc::config_error, "sweep must look like param:from:to:steps");
    SweepAxis axis;
    axis.parameter = trim(value.substr(0, colon));
    if (std::find(axis_parameters().begin(), axis_parameters().end(),
                  axis.parameter) == axis_parameters().end())
        fail(Errc::config_error, "unknown sweep parameter '" + axis.parameter + "'");
    const std::string rest = value.substr(colon + 1);
    if (rest.find(',') != std::string::npos) {
        axis.values = parse_list("sweep", rest);
    } else {
        std::vector<std::string> parts;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(trim(item));
        if (parts.size() == 1) {
            axis.values = {parse_double("sweep", parts[0])};
        } else if (parts.size() == 3) {
            const double from = parse_double("sweep from", parts[0]);
            const double to = parse_double("sweep to", parts[1]);
            const long steps = parse_long("sweep steps", parts[2]);
            if (steps < 1) fail(Errc::config_error, "sweep needs >= 1 step");
            if (steps == 1) {
                axis.values = {from};
            } else {
                const double h = (to - from) / static_cast<double>(steps - 1);
                for (long i = 0; i < steps; ++i)
                    axis.values.push_back(from + static_cast<double>(i) * h);
            }
        } else {
            fail(Errc::config_error, "sweep must look like param:from:to:steps");
        }
    }
    for (std::size_t i = 1; i < axis.values.size(); ++i)
        if (!(axis.values[i] > axis.values[i - 1]))
            fail(Errc::config_error, "sweep values must be strictly increasing");
    return axis;
}

} // namespace

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
    ScenarioConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            fail(Errc::config_error,
                 "line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (value.empty())
            fail(Errc::config_error, "empty value for " + key);

        if (key == "n") {
            cfg.n = static_cast<int>(parse_long(key, value));
        } else if (key == "award") {
            cfg.award = parse_double(key, value);
        } else if (key == "e_max") {
            cfg.e_max = parse_double(key, value);
        } else if (key == "fee_delta") {
            cfg.fee_delta = parse_double(key, value);
        } else if (key == "gamma") {
            cfg.gamma = parse_double(key, value);
        } else if (key == "cost_factor") {
            cfg.cost_factor = parse_double(key, value);
        } else if (key == "scheme") {
            cfg.scheme = parse_scheme(value);
        } else if (key == "theta") {
            cfg.theta = parse_double(key, value);
        } else if (key == "bet_spread") {
            cfg.bet_spread = parse_double(key, value);
        } else if (key == "bets") {
            cfg.bets = parse_list(key, value);
        } else if (key == "replicates") {
            cfg.replicates = static_cast<int>(parse_long(key, value));
        } else if (key == "seed") {
            const long v = parse_long(key, value);
            if (v < 0) fail(Errc::config_error, "seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(v);
        } else if (key == "ir_rule") {
            if (value == "literal")
                cfg.ir_rule = IrRule::literal;
            else if (value == "withdrawal")
                cfg.ir_rule = IrRule::withdrawal;
            else
                fail(Errc::config_error, "ir_rule must be literal or withdrawal");
        } else if (key == "sweep") {
            cfg.sweep_axis = parse_axis(value);
        } else if (key == "gamma_values") {
            cfg.gamma_values = parse_list(key, value);
        } else {
            fail(Errc::config_error, "unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::config_error, "cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void ScenarioConfig::validate() const {
    if (gamma && cost_factor)
        fail(Errc::config_error, "give gamma or cost_factor, not both");
    if (n < 1) fail(Errc::config_error, "n must be >= 1");
    if (replicates < 1) fail(Errc::config_error, "replicates must be >= 1");
    if (!(award > 0.0)) fail(Errc::config_error, "award must be positive");
    if (!(e_max > 1.0)) fail(Errc::config_error, "e_max must exceed 1");
    if (!(fee_delta >= 0.0)) fail(Errc::config_error, "fee_delta must be >= 0");
    if (!(theta > 0.0)) fail(Errc::config_error, "theta must be positive");
    if (!(bet_spread >= 1.0)) fail(Errc::config_error, "bet_spread must be >= 1");
    if (bets) {
        if (bets->empty()) fail(Errc::config_error, "bets list is empty");
        for (double b : *bets)
            if (!(b > 0.0)) fail(Errc::config_error, "bets must be positive");
        if (sweep_axis && sweep_axis->parameter == "n")
            fail(Errc::config_error, "cannot sweep n with explicit bets");
    }
    for (double g : gamma_values)
        if (!(g > 0.0)) fail(Errc::config_error, "gamma_values must be positive");
}

GameParams ScenarioConfig::params() const {
    if (cost_factor)
        return GameParams::from_cost_factor(award, e_max, *cost_factor, fee_delta);
    return GameParams::from_gamma(award, e_max, gamma.value_or(0.35), fee_delta);
}

double ScenarioConfig::ir_threshold(const GameParams& p) const {
    const double t = default_ir_threshold(p);
    return ir_rule == IrRule::literal ? t : -t;
}

TypeProfile sample_bets(const ScenarioConfig& config, int replicate_index) {
    std::vector<double> raw;
    if (config.bets) {
        raw = *config.bets;
    } else {
        Rng rng(config.seed, static_cast<std::uint64_t>(replicate_index));
        raw.resize(static_cast<std::size_t>(config.n));
        for (double& u : raw) u = rng.uniform(1.0, config.bet_spread);
    }
    double total = 0.0;
    for (double u : raw) total += u;
    const double factor = config.theta * config.award / total;
    for (double& u : raw) {
        u *= factor;
        if (!(u > 0.0) || !(u < config.award))
            fail(Errc::config_error,
                 "rescaled bet " + format_value(u) +
                     " leaves (0, award); adjust theta or n");
    }
    return normalize_types(raw, config.award);
}

namespace {

struct RepStats {
    double ar = 0.0;
    double pay_over_award = 0.0;
    double fairness = 0.0;
    double cost_over_award = 0.0;
    double profit_ratio = 0.0;
    int ir_pass = 0;
    int attackers = 0;
};

ScenarioConfig apply_axis(const ScenarioConfig& base, const std::string& parameter,
                          double value) {
    ScenarioConfig cfg = base;
    if (parameter == "theta") {
        cfg.theta = value;
    } else if (parameter == "gamma") {
        cfg.gamma = value;
        cfg.cost_factor.reset();
    } else if (parameter == "n") {
        cfg.n = static_cast<int>(std::llround(value));
    } else if (parameter == "award") {
        cfg.award = value;
    } else if (parameter == "fee_delta") {
        cfg.fee_delta = value;
    } else if (parameter == "e_max") {
        cfg.e_max = value;
    } else {
        fail(Errc::config_error, "unknown sweep parameter '" + parameter + "'");
    }
    return cfg;
}

RepStats run_replicate(const ScenarioConfig& cfg, int replicate) {
    const TypeProfile profile = sample_bets(cfg, replicate);
    const GameParams params = cfg.params();
    const Solution sol = solve(profile, cfg.scheme, params);
    const double award = params.award;
    const double bet_total = profile.bet_total(award);

    double pay_sum = 0.0;
    for (double p : sol.outcome.payments) pay_sum += p;

    // Mechanism invariants hold for every replicate or the sweep aborts.
    const double identity =
        (bet_total + award) * sol.outcome.attack_result - bet_total;
    if (pay_sum > award + currency_tol || std::abs(pay_sum - identity) > currency_tol)
        fail(Errc::invalid_argument,
             "budget/settlement identity violated (seed " +
                 std::to_string(cfg.seed) + ", replicate " +
                 std::to_string(replicate) + ")");
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (sol.outcome.payments[i] < -profile.bet(i, award) - currency_tol)
            fail(Errc::invalid_argument,
                 "payment floor violated (seed " + std::to_string(cfg.seed) +
                     ", replicate " + std::to_string(replicate) + ")");

    RepStats stats;
    stats.ar = sol.outcome.attack_result;
    stats.pay_over_award = pay_sum / award;
    stats.attackers = static_cast<int>(profile.size());

    const double raw = sol.equilibrium.raw_total;
    const double scale = raw > 1.0 ? 1.0 / raw : 1.0;
    double fair_sq = 0.0;
    double cost_sum = 0.0;
    double qu_sum = 0.0;
    const double threshold = cfg.ir_threshold(params);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double e = sol.equilibrium.efforts[i];
        const double c = cost(e, params);
        cost_sum += c;
        const double fair = award * (e * scale) * sol.outcome.attack_result;
        const double d = sol.outcome.payments[i] - fair;
        fair_sq += d * d;
        const double qu = sol.outcome.payments[i] - c - params.fee_delta;
        qu_sum += qu;
        if (qu >= threshold - currency_tol) ++stats.ir_pass;
    }
    stats.fairness = std::sqrt(fair_sq / static_cast<double>(profile.size()));
    stats.cost_over_award = cost_sum / award;
    const double mean_bet = bet_total / static_cast<double>(profile.size());
    stats.profit_ratio =
        (qu_sum / static_cast<double>(profile.size())) / mean_bet;
    return stats;
}

} // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& config, int threads) {
    config.validate();
    std::vector<double> axis_values = {0.0};
    std::string parameter = "none";
    if (config.sweep_axis) {
        axis_values = config.sweep_axis->values;
        parameter = config.sweep_axis->parameter;
    }

    const std::size_t n_axis = axis_values.size();
    const auto n_reps = static_cast<std::size_t>(config.replicates);
    std::vector<ScenarioConfig> configs;
    configs.reserve(n_axis);
    for (double v : axis_values)
        configs.push_back(config.sweep_axis ? apply_axis(config, parameter, v)
                                            : config);

    // Each (axis, replicate) task writes its own preallocated slot; the
    // reduction below runs in a fixed order, so output is identical for any
    // thread count.
    std::vector<RepStats> slots(n_axis * n_reps);
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= slots.size()) return;
            try {
                slots[idx] = run_replicate(configs[idx / n_reps],
                                           static_cast<int>(idx % n_reps));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::max(
        1, std::min(threads, static_cast<int>(slots.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<SweepRow> rows;
    rows.reserve(n_axis);
    for (std::size_t a = 0; a < n_axis; ++a) {
        SweepRow row;
        row.parameter = parameter;
        row.value = axis_values[a];
        row.replicates = config.replicates;
        row.seed = config.seed;
        long ir_pass = 0, attackers = 0;
        for (std::size_t r = 0; r < n_reps; ++r) {
            const RepStats& s = slots[a * n_reps + r];
            row.mean_attack_result += s.ar;
            row.mean_payment_over_award += s.pay_over_award;
            row.mean_fairness_rms += s.fairness;
            row.mean_total_cost_over_award += s.cost_over_award;
            row.mean_profit_over_mean_bet += s.profit_ratio;
            ir_pass += s.ir_pass;
            attackers += s.attackers;
        }
        const auto k = static_cast<double>(n_reps);
        row.mean_attack_result /= k;
        row.mean_payment_over_award /= k;
        row.mean_fairness_rms /= k;
        row.mean_total_cost_over_award /= k;
        row.mean_profit_over_mean_bet /= k;
        row.ir_pass_fraction =
            static_cast<double>(ir_pass) / static_cast<double>(attackers);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, RewardScheme scheme,
                     const std::vector<SweepRow>& rows) {
    out << "scheme,parameter,value,mean_attack_result,mean_payment_over_award,"
           "mean_fairness_rms,ir_pass_fraction,mean_total_cost_over_award,"
           "mean_profit_over_mean_bet,replicates,seed\n";
    for (const auto& r : rows) {
        out << to_string(scheme) << ',' << r.parameter << ','
            << format_value(r.value) << ',' << format_value(r.mean_attack_result)
            << ',' << format_value(r.mean_payment_over_award) << ','
            << format_value(r.mean_fairness_rms) << ','
            << format_value(r.ir_pass_fraction) << ','
            << format_value(r.mean_total_cost_over_award) << ','
            << format_value(r.mean_profit_over_mean_bet) << ',' << r.replicates
            << ',' << r.seed << '\n';
    }
}

std::string solve_report(const ScenarioConfig& config) {
    config.validate();
    const TypeProfile profile = config.bets
                                    ? normalize_types(*config.bets, config.award)
                                    : sample_bets(config, 0);
    const GameParams params = config.params();
    const Solution sol = solve(profile, config.scheme, params);
    const double threshold = config.ir_threshold(params);

    nlohmann::json j;
    j["scheme"] = to_string(config.scheme);
    j["seed"] = config.seed;
    j["kernels"] = kernels::active_backend().name;
    j["params"] = {{"award", params.award},
                   {"e_max", params.e_max},
                   {"cost_factor", params.cost_factor},
                   {"gamma", params.gamma},
                   {"fee_delta", params.fee_delta}};
    std::vector<double> bets;
    for (std::size_t i = 0; i < profile.size(); ++i)
        bets.push_back(profile.bet(i, params.award));
    j["profile"] = {{"bets", bets},
                    {"types", profile.types()},
                    {"theta", profile.theta()}};
    j["equilibrium"] = {{"efforts", sol.equilibrium.efforts},
                        {"raw_total", sol.equilibrium.raw_total},
                        {"attack_result", sol.equilibrium.attack_result}};
    const BudgetReport budget = check_budget(sol.outcome, params);
    std::vector<double> quasi;
    std::vector<bool> ir;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double qu = sol.outcome.payments[i] -
                          cost(sol.equilibrium.efforts[i], params) -
                          params.fee_delta;
        quasi.push_back(qu);
        ir.push_back(qu >= threshold - currency_tol);
    }
    j["settlement"] = {{"payments", sol.outcome.payments},
                       {"total_payments", budget.total_payments},
                       {"budget_ok", budget.ok},
                       {"sponsor_residual", sponsor_residual(sol.outcome, params)},
                       {"fairness_rms",
                        fairness_score(profile, config.scheme, params)},
                       {"quasi_utilities", quasi},
                       {"ir_threshold", threshold},
                       {"ir_pass", ir}};
    return j.dump(2);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::config_error, "cannot write '" + path.string() + "'");
    out << body;
}

std::vector<SweepRow> sweep_with_scheme(ScenarioConfig cfg, RewardScheme scheme,
                                        int threads) {
    cfg.scheme = scheme;
    return sweep(cfg, threads);
}

std::vector<SweepRow> sweep_with_gamma(ScenarioConfig cfg, RewardScheme scheme,
                                       double gamma, int threads) {
    cfg.gamma = gamma;
    cfg.cost_factor.reset();
    cfg.scheme = scheme;
    return sweep(cfg, threads);
}

} // namespace

std::vector<std::string> figure_suite(const std::string& config_dir,
                                      const std::string& out_dir, int threads) {
    namespace fs = std::filesystem;
    const fs::path cfg_dir(config_dir);
    const fs::path out(out_dir);
    fs::create_directories(out);
    std::vector<std::string> written;

    auto emit = [&](const char* name, const std::string& body) {
        const fs::path path = out / name;
        write_file(path, body);
        written.push_back(path.string());
    };

    // fig3: theta sweeps of attack result, payment share and fairness.
    {
        const auto cfg = ScenarioConfig::load((cfg_dir / "fig3.cfg").string());
        const auto lin = sweep_with_scheme(cfg, RewardScheme::linear, threads);
        const auto sq = sweep_with_scheme(cfg, RewardScheme::square, threads);
        std::ostringstream a, b, c;
        a << "theta,attack_result_linear,attack_result_square\n";
        b << "theta,payment_share_linear,payment_share_square\n";
        c << "theta,fairness_rms_linear,fairness_rms_square\n";
        for (std::size_t i = 0; i < lin.size(); ++i) {
            const std::string theta = format_value(lin[i].value);
            a << theta << ',' << format_value(lin[i].mean_attack_result) << ','
              << format_value(sq[i].mean_attack_result) << '\n';
            b << theta << ',' << format_value(lin[i].mean_payment_over_award)
              << ',' << format_value(sq[i].mean_payment_over_award) << '\n';
            c << theta << ',' << format_value(lin[i].mean_fairness_rms) << ','
              << format_value(sq[i].mean_fairness_rms) << '\n';
        }
        emit("fig3a.csv", a.str());
        emit("fig3b.csv", b.str());
        emit("fig3c.csv", c.str());
    }

    // fig4: gamma x theta grids; attack result, profit ratio, IR fraction.
    {
        const auto cfg = ScenarioConfig::load((cfg_dir / "fig4.cfg").string());
        if (cfg.gamma_values.empty())
            fail(Errc::config_error, "fig4.cfg needs gamma_values");
        std::ostringstream a, b;
        a << "gamma,theta,attack_result_linear,attack_result_square\n";
        b << "gamma,theta,profit_ratio_linear,ir_fraction_linear,"
             "profit_ratio_square,ir_fraction_square\n";
        for (double g : cfg.gamma_values) {
            const auto lin = sweep_with_gamma(cfg, RewardScheme::linear, g, threads);
            const auto sq = sweep_with_gamma(cfg, RewardScheme::square, g, threads);
            for (std::size_t i = 0; i < lin.size(); ++i) {
                const std::string prefix =
                    format_value(g) + "," + format_value(lin[i].value);
                a << prefix << ',' << format_value(lin[i].mean_attack_result)
                  << ',' << format_value(sq[i].mean_attack_result) << '\n';
                b << prefix << ','
                  << format_value(lin[i].mean_profit_over_mean_bet) << ','
                  << format_value(lin[i].ir_pass_fraction) << ','
                  << format_value(sq[i].mean_profit_over_mean_bet) << ','
                  << format_value(sq[i].ir_pass_fraction) << '\n';
            }
        }
        emit("fig4a.csv", a.str());
        emit("fig4b.csv", b.str());
    }

    // fig5: total attack cost over the same grid, and the n sweep.
    {
        const auto cfg = ScenarioConfig::load((cfg_dir / "fig5_cost.cfg").string());
        if (cfg.gamma_values.empty())
            fail(Errc::config_error, "fig5_cost.cfg needs gamma_values");
        std::ostringstream a;
        a << "gamma,theta,total_cost_over_award_linear,"
             "total_cost_over_award_square\n";
        for (double g : cfg.gamma_values) {
            const auto lin = sweep_with_gamma(cfg, RewardScheme::linear, g, threads);
            const auto sq = sweep_with_gamma(cfg, RewardScheme::square, g, threads);
            for (std::size_t i = 0; i < lin.size(); ++i)
                a << format_value(g) << ',' << format_value(lin[i].value) << ','
                  << format_value(lin[i].mean_total_cost_over_award) << ','
                  << format_value(sq[i].mean_total_cost_over_award) << '\n';
        }
        emit("fig5_cost.csv", a.str());
    }
    {
        const auto cfg = ScenarioConfig::load((cfg_dir / "fig5_n.cfg").string());
        const auto lin = sweep_with_scheme(cfg, RewardScheme::linear, threads);
        const auto sq = sweep_with_scheme(cfg, RewardScheme::square, threads);
        std::ostringstream a;
        a << "n,attack_result_linear,attack_result_square\n";
        for (std::size_t i = 0; i < lin.size(); ++i)
            a << format_value(lin[i].value) << ','
              << format_value(lin[i].mean_attack_result) << ','
              << format_value(sq[i].mean_attack_result) << '\n';
        emit("fig5_n.csv", a.str());
    }

    return written;
}

} // namespace csim
