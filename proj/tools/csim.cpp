// Command-line front end: solve one scenario, run parameter sweeps, emit the
// figure CSVs, or run the property checks.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csim/checks.hpp"
#include "csim/experiments.hpp"
#include "csim/kernels.hpp"
#include "csim/model.hpp"

namespace {

csim::ScenarioConfig load_config(const std::string& path,
                                 const std::optional<std::string>& scheme,
                                 const std::optional<std::uint64_t>& seed) {
    csim::ScenarioConfig cfg = csim::ScenarioConfig::load(path);
    if (scheme) cfg.scheme = csim::parse_scheme(*scheme);
    if (seed) cfg.seed = *seed;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"equilibrium and incentive analysis for contract-mediated "
                 "collaborative attacks"};
    app.require_subcommand(1);
    app.fallthrough(); // lets `csim solve --kernels scalar ...` parse too

    std::string kernels = "auto";
    app.add_option("--kernels", kernels, "kernel backend: auto|scalar|simd")
        ->capture_default_str();

    std::string config_path;
    std::optional<std::string> scheme;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::string config_dir = "configs";
    std::string golden_dir = "tests/golden";
    int threads = 1;
    bool skip_golden = false;

    auto* solve = app.add_subcommand("solve", "solve one scenario, print JSON");
    solve->add_option("--config", config_path, "scenario file")->required();
    solve->add_option("--scheme", scheme, "override reward scheme");
    solve->add_option("--seed", seed, "override RNG seed");

    auto* sweep = app.add_subcommand("sweep", "run the configured sweep");
    sweep->add_option("--config", config_path, "scenario file")->required();
    sweep->add_option("--scheme", scheme, "override reward scheme");
    sweep->add_option("--seed", seed, "override RNG seed");
    sweep->add_option("--out", out_dir, "output directory")->capture_default_str();
    sweep->add_option("--threads", threads, "worker threads")
        ->capture_default_str();

    auto* figures = app.add_subcommand("figures", "emit the figure CSVs");
    figures->add_option("--config-dir", config_dir, "panel config directory")
        ->capture_default_str();
    figures->add_option("--out", out_dir, "output directory")
        ->capture_default_str();
    figures->add_option("--threads", threads, "worker threads")
        ->capture_default_str();

    auto* check = app.add_subcommand("check", "run the property checks");
    check->add_option("--config-dir", config_dir, "panel config directory")
        ->capture_default_str();
    check->add_option("--golden-dir", golden_dir, "frozen figure CSVs")
        ->capture_default_str();
    check->add_option("--threads", threads, "worker threads")
        ->capture_default_str();
    check->add_flag("--skip-golden", skip_golden,
                    "skip the frozen-CSV comparison");

    CLI11_PARSE(app, argc, argv);

    try {
        csim::kernels::set_backend(kernels);

        if (solve->parsed()) {
            std::cout << csim::solve_report(load_config(config_path, scheme, seed))
                      << '\n';
            return 0;
        }

        if (sweep->parsed()) {
            const auto cfg = load_config(config_path, scheme, seed);
            const auto rows = csim::sweep(cfg, threads);
            std::filesystem::create_directories(out_dir);
            const auto path = std::filesystem::path(out_dir) / "sweep.csv";
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                std::cerr << "cannot write " << path << '\n';
                return 2;
            }
            csim::write_sweep_csv(out, cfg.scheme, rows);
            std::cout << path.string() << '\n';
            return 0;
        }

        if (figures->parsed()) {
            for (const auto& path :
                 csim::figure_suite(config_dir, out_dir, threads))
                std::cout << path << '\n';
            return 0;
        }

        if (check->parsed()) {
            csim::CheckOptions options;
            options.config_dir = config_dir;
            options.golden_dir = golden_dir;
            options.compare_golden = !skip_golden;
            options.threads = threads;
            std::string first_failure;
            for (const auto& result : csim::run_all_checks(options)) {
                std::printf("[%s] %s: %s (%.2fs)\n",
                            result.pass ? "PASS" : "FAIL", result.id.c_str(),
                            result.detail.c_str(), result.seconds);
                if (!result.pass && first_failure.empty())
                    first_failure = result.id;
            }
            if (!first_failure.empty()) {
                std::cerr << "check failed: " << first_failure << '\n';
                return 1;
            }
            return 0;
        }
    } catch (const csim::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
