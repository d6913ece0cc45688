#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "alex/verify.hpp"

namespace alex::cli {

/// Malformed scenario file; the message carries `file:line:` when known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// INI document plus enough of the raw text to point at offending lines.
class Config {
public:
    static Config load(const std::filesystem::path& file);

    const std::filesystem::path& file() const { return file_; }
    bool has(const std::string& section, const std::string& key) const;
    std::string text(const std::string& section, const std::string& key) const;
    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
    double number(const std::string& section, const std::string& key) const;
    double number(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key, int fallback) const;
    std::vector<double> numbers(const std::string& section, const std::string& key) const;
    std::vector<double> numbers(const std::string& section, const std::string& key,
                                std::vector<double> fallback) const;
    std::vector<std::string> words(const std::string& section, const std::string& key) const;

    /// `file:line: [section] key: what`
    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const;

private:
    int line_of(const std::string& section, const std::string& key) const;

    std::filesystem::path file_;
    boost::property_tree::ptree tree_;
    std::vector<std::string> lines_;
};

struct Scenario {
    std::string name;
    std::string mode;  ///< radial | dirichlet | global | dims | verify-suite
    std::filesystem::path output;
    Config config;
};

/// Validates the mode-specific required fields.
Scenario load_scenario(const std::filesystem::path& file);

struct ScenarioResult {
    std::string name;
    std::vector<CheckRecord> records;
    std::string error;  ///< solver failure or I/O problem; empty on success
    bool ok() const;
};

/// Writes artifacts under `out_dir` (created if needed). Never throws for
/// solver failures; they end up in `error`.
ScenarioResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir, double tol_scale);

/// Fixed-width table of every record: scenario, check, tag, inputs, measured, expected, tolerance, status.
std::string summary_table(const std::vector<ScenarioResult>& results);

}  // namespace alex::cli
