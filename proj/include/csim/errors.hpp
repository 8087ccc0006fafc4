#pragma once

#include <stdexcept>
#include <string>

namespace csim {

enum class Errc {
    non_positive_bet,
    bet_exceeds_award,
    effort_out_of_range,
    result_out_of_range,
    invalid_transaction_count,
    split_mismatch,
    insufficient_funds,
    invalid_window,
    too_early,
    too_late,
    bet_too_small,
    bad_signature,
    already_settled,
    no_bets,
    config_error,
    invalid_argument,
};

const char* to_string(Errc code);

// Single exception type for the whole library; tests and the contract
// simulator dispatch on code() rather than on the message text.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace csim
