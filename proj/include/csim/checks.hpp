#pragma once

#include <string>
#include <vector>

namespace csim {

struct CheckResult {
    std::string id;     // short handle, e.g. "budget-balance"
    std::string name;   // one-line description
    bool pass = false;
    std::string detail; // worst gaps, counts, elapsed time
    double seconds = 0.0;
};

struct CheckOptions {
    std::string config_dir = "configs";      // shipped figure configs
    std::string golden_dir = "tests/golden"; // frozen figure CSVs
    bool compare_golden = true;
    int threads = 1;
};

// The eight machine-checked properties, full scale. Each runs independently;
// a failure carries the offending draw in detail.
CheckResult check_budget_balance(const CheckOptions& options);
CheckResult check_strategy_proofness(const CheckOptions& options);
CheckResult check_dominance(const CheckOptions& options);
CheckResult check_solver(const CheckOptions& options);
CheckResult check_figure_trends(const CheckOptions& options);   // theta sweeps
CheckResult check_parameter_trends(const CheckOptions& options); // gamma, n
CheckResult check_contract_conservation(const CheckOptions& options);
CheckResult check_determinism(const CheckOptions& options);

std::vector<CheckResult> run_all_checks(const CheckOptions& options);

} // namespace csim
