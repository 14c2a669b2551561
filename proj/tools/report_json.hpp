#pragma once

#include <decoupler/decouple.hpp>
#include <decoupler/json_io.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace decoupler_cli {

/// Echo of the fully resolved run parameters, written into the report
/// so a run can be replayed from its own output.
struct RunMetadata {
    std::string method;
    int rank = 0;
    int degree = 0;
    int samples = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> alpha1;  // unset = automatic 1/||T||_F^2
    std::optional<double> alpha2;
    int restarts = 0;
    int max_iters = 0;
    double tol = 0.0;
};

void write_run_metadata(decoupler::JsonWriter& w, const RunMetadata& meta);

/// Full decouple report: run metadata, result metrics, solver
/// diagnostics and the recovered model inline.
std::string report_to_json(const decoupler::DecoupleReport& report, const RunMetadata& meta);

/// Human-readable summary for --pretty.
std::string report_summary(const decoupler::DecoupleReport& report, const RunMetadata& meta);

}  // namespace decoupler_cli
