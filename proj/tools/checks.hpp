#pragma once

#include <functional>
#include <string>
#include <vector>

#include "alex/verify.hpp"

namespace alex::cli {

struct CheckContext {
    double tol_scale = 1.0;  ///< forwarded to the solvers
};

struct CheckSpec {
    std::string name;
    std::string tag;       ///< anchor used by `list-checks --filter`
    std::string citation;  ///< what the check asserts, one line
    double tolerance = 0.0;
    std::function<std::vector<CheckRecord>(const CheckContext&)> run;
};

const std::vector<CheckSpec>& check_catalogue();

/// Entries whose name, tag or citation contains `filter` (all when empty).
std::vector<const CheckSpec*> find_checks(const std::string& filter);

CheckRecord make_record(std::string name, std::string tag, nlohmann::ordered_json measured,
                        nlohmann::ordered_json expected, double tolerance, bool pass);

}  // namespace alex::cli
