#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "csim/mechanism.hpp"
#include "csim/model.hpp"

namespace csim {

using Tick = std::int64_t; // logical clock, advanced by the test driver

enum class Phase { deployed, committing, attacking, settled };

const char* to_string(Phase phase);

// Flat account -> balance map plus a sink for burned transaction fees.
// Balances may go negative through fees (guards check principal only).
struct Ledger {
    std::map<std::string, double> balances;
    double fee_sink = 0.0;

    double balance(const std::string& account) const;
};

struct BettingRecord {
    std::string account;
    double bet = 0.0;
    double reward = 0.0; // gross reward credited at settlement
};

struct ContractState {
    Phase phase = Phase::deployed;
    std::string owner;
    double award = 0.0;
    double bet_min = 0.0;
    Tick start_time = 0;
    Tick end_time = 0;
    std::string target_url; // opaque label, never interpreted
    std::vector<BettingRecord> bettings;
    double escrow = 0.0; // award + committed bets held by the contract
};

// Oracle answer: the realized attack result with an authenticity tag.
// The tag is a keyed digest over (attack_result, target_url, window); it
// stands in for a real oracle signature and is checked at settlement.
struct DataFeed {
    double attack_result = 0.0;
    std::uint64_t tag = 0;
};

std::uint64_t feed_tag(std::uint64_t key, double attack_result,
                       const std::string& target_url, Tick start_time,
                       Tick end_time);

bool sig_ver(std::uint64_t key, const DataFeed& feed,
             const std::string& target_url, Tick start_time, Tick end_time);

struct TraceRow {
    Tick tick = 0;
    std::string op;
    std::string account;
    double amount = 0.0;
    std::string result; // "ok" or "rejected: <code>"
};

struct SettlementReport {
    double attack_result = 0.0;
    std::vector<std::pair<std::string, double>> rewards; // gross, per account
    double residual_to_owner = 0.0;
    double fee_total = 0.0; // fees burned over the contract's lifetime
};

// Single-writer simulation of the betting contract's lifecycle:
// deployed -> committing (init) -> attacking (window opens) -> settled.
// Every accepted transaction burns a flat fee_delta from the sender, value
// otherwise only moves between balances and the contract escrow, so
// sum(balances) + escrow + fee_sink is invariant. Rejected transactions
// throw and leave state untouched.
class ContractSim {
public:
    struct Options {
        double fee_delta = 0.1;
        std::uint64_t oracle_key = 0x6f7261636c65ULL;
        bool charge_fee_on_reject = false;
        bool charge_fee_on_init = true;
    };

    explicit ContractSim(Ledger initial);
    ContractSim(Ledger initial, Options options);

    const Ledger& ledger() const noexcept { return ledger_; }
    const ContractState& state() const noexcept { return state_; }
    const std::vector<TraceRow>& trace() const noexcept { return trace_; }
    const Options& options() const noexcept { return options_; }

    // Sponsor escrows the award and opens the betting window.
    // Requires balance(sponsor) >= award and start < end.
    void init(const std::string& sponsor, double award, std::string target_url,
              Tick start_time, Tick end_time, double bet_min, Tick now = 0);

    // Escrows a bet. Requires committing phase, now < start_time,
    // bet > bet_min, balance(account) >= bet. Repeat commits from one
    // account accumulate into a single position.
    void commit_bet(const std::string& account, double bet, Tick now);

    // Plays the attack window: derives the type profile from the book
    // (grouped by account, distinct accounts stay distinct), solves the
    // equilibrium and returns the oracle feed for the realized result.
    // Requires now >= start_time and at least one bet.
    DataFeed run_attack_phase(RewardScheme scheme, const GameParams& params,
                              Tick now);

    // Settles: verifies the feed tag, credits each bettor its gross reward
    // (stake plus mechanism payment) and returns the escrow residual to the
    // owner. Requires now > end_time; idempotence is enforced
    // (already_settled on a second call). With an empty book the feed is
    // optional and the award is refunded.
    SettlementReport reward_allocation(const std::optional<DataFeed>& feed,
                                       RewardScheme scheme, const GameParams& params,
                                       Tick now);

    TypeProfile profile_from_bettings() const; // throws no_bets when empty

    // sum(balances) + escrow + fee_sink.
    double total_value() const;

    // Trace as CSV: tick,op,account,amount,result.
    void write_trace_csv(std::ostream& out) const;

private:
    void charge_fee(const std::string& account, Tick now);
    void record(Tick tick, const std::string& op, const std::string& account,
                double amount, const std::string& result);
    [[noreturn]] void reject(Tick now, const std::string& op,
                             const std::string& account, double amount,
                             Errc code, const std::string& what);

    Ledger ledger_;
    ContractState state_;
    Options options_;
    std::vector<TraceRow> trace_;
};

} // namespace csim
