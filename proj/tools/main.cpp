// Batch front end: scenario runs and the check catalogue.
//
//   alex run <file>... [--out DIR] [--jobs N] [--tol-scale F]
//   alex list-checks [--filter TAG]
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad config or usage,
// 3 a solver or I/O failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "checks.hpp"
#include "scenario.hpp"

namespace {

using namespace alex::cli;

int cmd_run(const std::vector<std::string>& files, const std::string& out, int jobs, double tol_scale) {
    std::vector<Scenario> scenarios;
    try {
        for (const auto& f : files) scenarios.push_back(load_scenario(f));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        for (std::size_t j = i + 1; j < scenarios.size(); ++j)
            if (scenarios[i].output == scenarios[j].output) {
                std::cerr << "error: scenarios `" << scenarios[i].name << "` and `" << scenarios[j].name
                          << "` write to the same output directory\n";
                return 2;
            }

    std::vector<ScenarioResult> results(scenarios.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++)
            results[i] = run_scenario(scenarios[i], out, tol_scale);
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::cout << summary_table(results);
    int status = 0;
    for (const auto& r : results) {
        if (!r.error.empty()) status = 3;
        else if (!r.ok() && status == 0) status = 1;
    }
    return status;
}

int cmd_list(const std::string& filter) {
    const auto found = find_checks(filter);
    std::size_t wn = 4, wt = 3;
    for (const auto* c : found) {
        wn = std::max(wn, c->name.size());
        wt = std::max(wt, c->tag.size());
    }
    for (const auto* c : found) {
        char tol[32];
        std::snprintf(tol, sizeof tol, "%.17g", c->tolerance);
        std::cout << std::left << std::setw(static_cast<int>(wn) + 2) << c->name << std::setw(static_cast<int>(wt) + 2)
                  << c->tag << std::setw(24) << tol << c->citation << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular Monge-Ampere solver and verification runner"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::string out = "out";
    int jobs = 1;
    double tol_scale = 1.0;
    auto* run = app.add_subcommand("run", "Run scenario files");
    run->add_option("files", files, "Scenario files (INI)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory")->capture_default_str();
    run->add_option("--jobs", jobs, "Scenarios run concurrently")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--tol-scale", tol_scale, "Solver tolerance multiplier")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::string filter;
    auto* list = app.add_subcommand("list-checks", "List the verification checks");
    list->add_option("--filter", filter, "Substring of the name, tag or description");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*run) return cmd_run(files, out, jobs, tol_scale);
    return cmd_list(filter);
}
