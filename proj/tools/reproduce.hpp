#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace decoupler_cli {

struct ReproduceOutcome {
    std::string report_json;
    bool all_pass = false;
};

/// Runs one bundled example end to end, printing one PASS/FAIL line per
/// assertion, and returns the machine-readable report.
ReproduceOutcome run_reproduce(const std::string& example, std::uint64_t seed, std::ostream& progress);

}  // namespace decoupler_cli
