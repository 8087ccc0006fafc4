// Acceptance gate: runs every machine-checked property at full scale and
// prints one line per criterion. Exits nonzero if any criterion fails.
#include <cstdio>
#include <cstring>
#include <string>

#include "csim/checks.hpp"

int main(int argc, char** argv) {
    csim::CheckOptions options;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "missing value for %s\n", arg.c_str());
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--config-dir") {
            options.config_dir = next();
        } else if (arg == "--golden-dir") {
            options.golden_dir = next();
        } else if (arg == "--threads") {
            options.threads = std::atoi(next());
        } else if (arg == "--skip-golden") {
            options.compare_golden = false;
        } else {
            std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
            return 2;
        }
    }

    const auto results = csim::run_all_checks(options);
    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::printf("[%s] C%zu %s: %s (%.2fs)\n", r.pass ? "PASS" : "FAIL",
                    i + 1, r.id.c_str(), r.detail.c_str(), r.seconds);
        if (!r.pass) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, results.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", results.size());
    return 0;
}
