#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "csim/mechanism.hpp"
#include "csim/model.hpp"

namespace csim {

// Deterministic replicate substreams: the same (seed, replicate) pair yields
// the same draws on every platform and thread count. Axis points reuse the
// replicate streams (common random numbers), which makes sweep trends exact
// per draw instead of statistical.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform(double lo, double hi); // 53-bit mantissa mapping, [lo, hi)

private:
    std::uint64_t state_;
};

struct SweepAxis {
    std::string parameter;      // theta | gamma | n | award | e_max | fee_delta
    std::vector<double> values; // ascending grid
};

enum class IrRule { literal, withdrawal }; // threshold +2*delta vs -2*delta

// Flat key=value scenario description (see configs/). Exactly one of gamma
// and cost_factor may be given; gamma=0.35 is the default when neither is.
struct ScenarioConfig {
    int n = 30;
    double award = 100.0;
    double e_max = 2.0;
    double fee_delta = 0.1;
    std::optional<double> gamma;
    std::optional<double> cost_factor;
    RewardScheme scheme = RewardScheme::linear;
    double theta = 1.0;       // target stake ratio; bets rescale to theta*award
    double bet_spread = 10.0; // raw bets ~ Uniform(1, bet_spread) before rescale
    std::optional<std::vector<double>> bets; // explicit bets (skip sampling)
    int replicates = 50;
    std::uint64_t seed = 20240405;
    IrRule ir_rule = IrRule::literal;
    std::optional<SweepAxis> sweep_axis;
    std::vector<double> gamma_values; // outer grid for the gamma-sweep figures

    static ScenarioConfig load(const std::string& path);
    static ScenarioConfig parse(const std::string& text); // throws config_error

    void validate() const;
    GameParams params() const;
    double ir_threshold(const GameParams& params) const;
};

// One sweep grid point, averaged over replicates.
struct SweepRow {
    std::string parameter;
    double value = 0.0;
    double mean_attack_result = 0.0;
    double mean_payment_over_award = 0.0;    // sum(payments) / award
    double mean_fairness_rms = 0.0;
    double ir_pass_fraction = 0.0;           // over attacker x replicate
    double mean_total_cost_over_award = 0.0; // sum cost(e_i) / award
    double mean_profit_over_mean_bet = 0.0;  // mean quasi-utility / mean bet
    int replicates = 0;
    std::uint64_t seed = 0;
};

// Draws the bet profile for one replicate: raw bets Uniform(1, bet_spread),
// rescaled so they sum to theta * award exactly; explicit bets rescale the
// same way. Throws config_error if a rescaled bet leaves (0, award).
TypeProfile sample_bets(const ScenarioConfig& config, int replicate_index);

// Runs the configured sweep (a single row when no axis is set). Validates
// budget, the payment floor and the settlement identity
// sum(payments) = (bet_t + AW) * ar - bet_t on every replicate; a violation
// aborts with the offending seed and axis value in the message. Output is
// byte-stable across runs and thread counts.
std::vector<SweepRow> sweep(const ScenarioConfig& config, int threads = 1);

void write_sweep_csv(std::ostream& out, RewardScheme scheme,
                     const std::vector<SweepRow>& rows);

// Renders the solved scenario (profile, efforts, payments, checks) as JSON.
std::string solve_report(const ScenarioConfig& config);

// Runs the shipped panel configs from config_dir and writes one CSV per
// panel into out_dir:
//   fig3a.csv  theta vs mean attack result        (both schemes)
//   fig3b.csv  theta vs payment share of award    (both schemes)
//   fig3c.csv  theta vs fairness rms              (both schemes)
//   fig4a.csv  gamma x theta vs attack result     (both schemes)
//   fig4b.csv  gamma x theta vs profit ratio and IR fraction
//   fig5_cost.csv  gamma x theta vs total cost / award
//   fig5_n.csv     n vs attack result at fixed theta
// Returns the paths written.
std::vector<std::string> figure_suite(const std::string& config_dir,
                                      const std::string& out_dir,
                                      int threads = 1);

// %.12g with stable inf/nan spelling; the one float format used in CSVs.
std::string format_value(double v);

} // namespace csim
