#include "csim/contract.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

namespace csim {

const char* to_string(Phase phase) {
    switch (phase) {
    case Phase::deployed: return "deployed";
    case Phase::committing: return "committing";
    case Phase::attacking: return "attacking";
    case Phase::settled: return "settled";
    }
    return "unknown";
}

double Ledger::balance(const std::string& account) const {
    const auto it = balances.find(account);
    return it == balances.end() ? 0.0 : it->second;
}

namespace {

// FNV-1a over the canonical feed payload, keyed by prefixing the key bytes.
// A stand-in for an oracle signature: deterministic, key-dependent, and any
// payload tamper flips the tag with overwhelming probability. Not crypto.
std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

} // namespace

std::uint64_t feed_tag(std::uint64_t key, double attack_result,
                       const std::string& target_url, Tick start_time,
                       Tick end_time) {
    char payload[128];
    const int len =
        std::snprintf(payload, sizeof payload, "%.17g|%" PRId64 "|%" PRId64 "|",
                      attack_result, start_time, end_time);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    hash = fnv1a(hash, &key, sizeof key);
    hash = fnv1a(hash, payload, static_cast<std::size_t>(len));
    hash = fnv1a(hash, target_url.data(), target_url.size());
    return hash;
}

bool sig_ver(std::uint64_t key, const DataFeed& feed, const std::string& target_url,
             Tick start_time, Tick end_time) {
    return feed.tag ==
           feed_tag(key, feed.attack_result, target_url, start_time, end_time);
}

ContractSim::ContractSim(Ledger initial) : ContractSim(std::move(initial), Options{}) {}

ContractSim::ContractSim(Ledger initial, Options options)
    : ledger_(std::move(initial)), options_(options) {}

void ContractSim::record(Tick tick, const std::string& op,
                         const std::string& account, double amount,
                         const std::string& result) {
    trace_.push_back({tick, op, account, amount, result});
}

void ContractSim::reject(Tick now, const std::string& op,
                         const std::string& account, double amount, Errc code,
                         const std::string& what) {
    if (options_.charge_fee_on_reject && !account.empty()) {
        ledger_.balances[account] -= options_.fee_delta;
        ledger_.fee_sink += options_.fee_delta;
    }
    record(now, op, account, amount, std::string("rejected: ") + to_string(code));
    throw Error(code, what);
}

void ContractSim::charge_fee(const std::string& account, Tick) {
    ledger_.balances[account] -= options_.fee_delta;
    ledger_.fee_sink += options_.fee_delta;
}

void ContractSim::init(const std::string& sponsor, double award,
                       std::string target_url, Tick start_time, Tick end_time,
                       double bet_min, Tick now) {
    if (state_.phase != Phase::deployed)
        reject(now, "init", sponsor, award, Errc::already_settled,
               "contract already initialized");
    if (!(award > 0.0))
        reject(now, "init", sponsor, award, Errc::invalid_argument,
               "award must be positive");
    if (!(bet_min >= 0.0))
        reject(now, "init", sponsor, award, Errc::invalid_argument,
               "bet_min must be nonnegative");
    if (start_time >= end_time)
        reject(now, "init", sponsor, award, Errc::invalid_window,
               "start_time must precede end_time");
    if (ledger_.balance(sponsor) < award - currency_tol)
        reject(now, "init", sponsor, award, Errc::insufficient_funds,
               "sponsor cannot cover the award");

    ledger_.balances[sponsor] -= award;
    state_.phase = Phase::committing;
    state_.owner = sponsor;
    state_.award = award;
    state_.bet_min = bet_min;
    state_.start_time = start_time;
    state_.end_time = end_time;
    state_.target_url = std::move(target_url);
    state_.escrow = award;
    if (options_.charge_fee_on_init) charge_fee(sponsor, now);
    record(now, "init", sponsor, award, "ok");
}

void ContractSim::commit_bet(const std::string& account, double bet, Tick now) {
    if (state_.phase != Phase::committing)
        reject(now, "commit_bet", account, bet, Errc::too_late,
               "betting window is not open");
    if (now >= state_.start_time)
        reject(now, "commit_bet", account, bet, Errc::too_late,
               "attack window already started");
    if (!(bet > state_.bet_min))
        reject(now, "commit_bet", account, bet, Errc::bet_too_small,
               "bet must exceed bet_min");
    if (ledger_.balance(account) < bet - currency_tol)
        reject(now, "commit_bet", account, bet, Errc::insufficient_funds,
               "balance cannot cover the bet");

    ledger_.balances[account] -= bet;
    state_.escrow += bet;
    const auto it = std::find_if(state_.bettings.begin(), state_.bettings.end(),
                                 [&](const BettingRecord& r) {
                                     return r.account == account;
                                 });
    if (it != state_.bettings.end())
        it->bet += bet;
    else
        state_.bettings.push_back({account, bet, 0.0});
    charge_fee(account, now);
    record(now, "commit_bet", account, bet, "ok");
}

TypeProfile ContractSim::profile_from_bettings() const {
    if (state_.bettings.empty())
        fail(Errc::no_bets, "no bets were committed");
    std::vector<double> bets;
    bets.reserve(state_.bettings.size());
    for (const auto& rec : state_.bettings) bets.push_back(rec.bet);
    return normalize_types(bets, state_.award);
}

DataFeed ContractSim::run_attack_phase(RewardScheme scheme,
                                       const GameParams& params, Tick now) {
    if (state_.phase != Phase::committing)
        reject(now, "run_attack_phase", "", 0.0, Errc::too_late,
               "attack phase requires an open contract");
    if (now < state_.start_time)
        reject(now, "run_attack_phase", "", 0.0, Errc::too_early,
               "attack window has not started");
    if (state_.bettings.empty())
        reject(now, "run_attack_phase", "", 0.0, Errc::no_bets,
               "no bets were committed");
    if (std::abs(params.award - state_.award) > currency_tol)
        reject(now, "run_attack_phase", "", 0.0, Errc::invalid_argument,
               "params.award disagrees with the contract award");

    const TypeProfile profile = profile_from_bettings();
    const Equilibrium eq = attack_result(profile, scheme, params);
    state_.phase = Phase::attacking;
    record(now, "run_attack_phase", "", eq.attack_result, "ok");

    DataFeed feed;
    feed.attack_result = eq.attack_result;
    feed.tag = feed_tag(options_.oracle_key, feed.attack_result,
                        state_.target_url, state_.start_time, state_.end_time);
    return feed;
}

SettlementReport ContractSim::reward_allocation(const std::optional<DataFeed>& feed,
                                                RewardScheme scheme,
                                                const GameParams& params,
                                                Tick now) {
    if (state_.phase == Phase::settled)
        reject(now, "reward_allocation", "", 0.0, Errc::already_settled,
               "contract already settled");
    if (state_.phase == Phase::deployed)
        reject(now, "reward_allocation", "", 0.0, Errc::too_early,
               "contract not initialized");
    if (now <= state_.end_time)
        reject(now, "reward_allocation", "", 0.0, Errc::too_early,
               "attack window has not closed");

    SettlementReport report;

    if (state_.bettings.empty()) {
        // Nobody joined: refund the award to the owner.
        ledger_.balances[state_.owner] += state_.escrow;
        report.residual_to_owner = state_.escrow;
        state_.escrow = 0.0;
        state_.phase = Phase::settled;
        report.fee_total = ledger_.fee_sink;
        record(now, "reward_allocation", state_.owner, report.residual_to_owner,
               "ok");
        return report;
    }

    if (!feed ||
        !sig_ver(options_.oracle_key, *feed, state_.target_url, state_.start_time,
                 state_.end_time))
        reject(now, "reward_allocation", "", 0.0, Errc::bad_signature,
               "data feed tag does not verify");
    if (std::abs(params.award - state_.award) > currency_tol)
        reject(now, "reward_allocation", "", 0.0, Errc::invalid_argument,
               "params.award disagrees with the contract award");

    const TypeProfile profile = profile_from_bettings();
    report.attack_result = feed->attack_result;

    // Gross reward per bettor: bet returned plus the mechanism's net payment,
    // i.e. (bet_t + AW) * share * attack_result.
    for (std::size_t i = 0; i < state_.bettings.size(); ++i) {
        auto& rec = state_.bettings[i];
        const double gross =
            reward(scheme, profile, i, feed->attack_result, params);
        rec.reward = gross;
        ledger_.balances[rec.account] += gross;
        state_.escrow -= gross;
        report.rewards.emplace_back(rec.account, gross);
    }
    ledger_.balances[state_.owner] += state_.escrow;
    report.residual_to_owner = state_.escrow;
    state_.escrow = 0.0;
    state_.phase = Phase::settled;
    report.fee_total = ledger_.fee_sink;
    record(now, "reward_allocation", state_.owner, report.residual_to_owner, "ok");
    return report;
}

double ContractSim::total_value() const {
    double total = 0.0;
    for (const auto& [account, balance] : ledger_.balances) total += balance;
    return total + state_.escrow + ledger_.fee_sink;
}

void ContractSim::write_trace_csv(std::ostream& out) const {
    out << "tick,op,account,amount,result\n";
    char buf[64];
    for (const auto& row : trace_) {
        std::snprintf(buf, sizeof buf, "%.12g", row.amount);
        out << row.tick << ',' << row.op << ',' << row.account << ',' << buf << ','
            << row.result << '\n';
    }
}

} // namespace csim
