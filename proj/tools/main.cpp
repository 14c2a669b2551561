#include "report_json.hpp"
#include "reproduce.hpp"

#include <decoupler/decouple.hpp>
#include <decoupler/demos.hpp>
#include <decoupler/json_io.hpp>
#include <decoupler/model.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("DECOUPLER_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring non-numeric DECOUPLER_SEED='" << env << "'\n";
        }
    }
    return 42;
}

/// Function input: a JSON document ({"m":..,"outputs":[..]}) or plain
/// text with one polynomial per line (requires --vars).
decoupler::VectorPolynomial load_function(const std::string& path, std::optional<int> vars) {
    const std::string content = decoupler::read_file(path);
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        throw std::runtime_error("input file '" + path + "' is empty");
    }
    if (content[first] == '{') {
        return decoupler::function_from_json(content);
    }
    if (!vars) {
        throw std::runtime_error("text input requires --vars");
    }
    decoupler::VectorPolynomial f;
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        f.outputs.push_back(decoupler::parse_polynomial(line, *vars));
    }
    if (f.outputs.empty()) {
        throw std::runtime_error("input file '" + path + "' contains no polynomials");
    }
    return f;
}

struct DecoupleArgs {
    std::string input;
    std::optional<int> vars;
    int rank = 1;
    int degree = 3;
    std::string method = "joint";
    int samples = 200;
    double lo = -10.0;
    double hi = 10.0;
    std::uint64_t seed = 42;
    std::optional<double> alpha1;
    std::optional<double> alpha2;
    int restarts = 10;
    int max_iters = 2000;
    double tol = 1e-12;
    std::string truth_path;
    std::string output = "report.json";
    std::string model_out = "model.json";
    bool pretty = false;
    int verbosity = 0;
};

int cmd_decouple(const DecoupleArgs& args) {
    decoupler::VectorPolynomial f;
    std::optional<decoupler::DecoupledModel> truth;
    decoupler::DecoupleConfig cfg;
    try {
        f = load_function(args.input, args.vars);
        if (!args.truth_path.empty()) {
            truth = decoupler::model_from_json(decoupler::read_file(args.truth_path));
        }
        cfg.rank = args.rank;
        cfg.degree = args.degree;
        cfg.method = decoupler::method_from_string(args.method);
        cfg.sampling = decoupler::SamplingConfig::box(args.samples, args.lo, args.hi,
                                                      f.num_vars(), args.seed);
        cfg.cpd.rank = args.rank;
        cfg.cpd.max_iters = args.max_iters;
        cfg.cpd.tol = args.tol;
        cfg.cpd.restarts = args.restarts;
        cfg.cpd.seed = args.seed + decoupler::kSolverSeedOffset;
        cfg.cpd.alpha1 = args.alpha1;
        cfg.cpd.alpha2 = args.alpha2;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    if (args.verbosity > 0) {
        std::cerr << "decoupling " << f.num_outputs() << " outputs in " << f.num_vars()
                  << " variables, method=" << args.method << ", rank=" << args.rank << "\n";
    }

    decoupler_cli::RunMetadata meta;
    meta.method = args.method;
    meta.rank = args.rank;
    meta.degree = args.degree;
    meta.samples = args.samples;
    meta.lo = args.lo;
    meta.hi = args.hi;
    meta.seed = args.seed;
    meta.alpha1 = args.alpha1;
    meta.alpha2 = args.alpha2;
    meta.restarts = args.restarts;
    meta.max_iters = args.max_iters;
    meta.tol = args.tol;

    decoupler::DecoupleReport report;
    try {
        report = decoupler::run_decouple(f, cfg, truth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    try {
        decoupler::write_file(args.output, decoupler_cli::report_to_json(report, meta));
        decoupler::write_file(args.model_out, decoupler::model_to_json(report.model) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    if (args.pretty) {
        std::cout << decoupler_cli::report_summary(report, meta);
    }
    for (const auto& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    if (!report.converged) {
        std::cerr << "warning: solver did not meet its convergence criterion\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_expand(const std::string& model_path, const std::string& output) {
    std::string json;
    try {
        const auto model = decoupler::model_from_json(decoupler::read_file(model_path));
        json = decoupler::function_to_json(decoupler::expand_decoupled(model)) + "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    try {
        if (output.empty() || output == "-") {
            std::cout << json;
        } else {
            decoupler::write_file(output, json);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

int cmd_reproduce(const std::string& example, std::uint64_t seed, const std::string& output) {
    decoupler_cli::ReproduceOutcome outcome;
    try {
        outcome = decoupler_cli::run_reproduce(example, seed, std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    try {
        if (output.empty() || output == "-") {
            std::cout << outcome.report_json;
        } else {
            decoupler::write_file(output, outcome.report_json);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return outcome.all_pass ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decoupler: recover f(x) = W g(V^T x) from derivative tensors"};
    app.require_subcommand(1);

    DecoupleArgs dargs;
    dargs.seed = default_seed();
    auto* dec = app.add_subcommand("decouple", "Decouple a coupled polynomial function");
    dec->add_option("--input", dargs.input, "Function file (JSON or text, one polynomial per line)")
        ->required();
    dec->add_option("--vars", dargs.vars, "Number of variables (text input only)");
    dec->add_option("--rank", dargs.rank, "Number of branches r")->required();
    dec->add_option("--degree", dargs.degree, "Degree of the univariate branches");
    dec->add_option("--method", dargs.method, "jacobian | hessian | joint")
        ->check(CLI::IsMember({"jacobian", "hessian", "joint"}));
    dec->add_option("--samples", dargs.samples, "Number of training sample points");
    dec->add_option("--lo", dargs.lo, "Sampling box lower bound");
    dec->add_option("--hi", dargs.hi, "Sampling box upper bound");
    dec->add_option("--seed", dargs.seed, "Base seed (default: DECOUPLER_SEED or 42)");
    dec->add_option("--alpha1", dargs.alpha1, "Weight of the Jacobian term (default: 1/||J||_F^2)");
    dec->add_option("--alpha2", dargs.alpha2, "Weight of the Hessian term (default: 1/||H||_F^2)");
    dec->add_option("--restarts", dargs.restarts, "Random restarts");
    dec->add_option("--max-iters", dargs.max_iters, "Iteration cap per restart");
    dec->add_option("--tol", dargs.tol, "Convergence tolerance");
    dec->add_option("--truth", dargs.truth_path, "Ground-truth model JSON for factor scoring");
    dec->add_option("--output", dargs.output, "Report JSON path");
    dec->add_option("--model-out", dargs.model_out, "Recovered model JSON path");
    dec->add_flag("--pretty", dargs.pretty, "Print a human-readable summary");
    dec->add_flag("-v,--verbose", dargs.verbosity, "Log progress to stderr");

    std::string expand_model;
    std::string expand_output;
    auto* exp = app.add_subcommand("expand", "Expand a decoupled model into coupled polynomials");
    exp->add_option("--model", expand_model, "Model JSON path")->required();
    exp->add_option("--output", expand_output, "Function JSON path (default: stdout)");

    std::string repro_example;
    std::string repro_output;
    std::uint64_t repro_seed = default_seed();
    auto* rep = app.add_subcommand("reproduce", "Run a bundled example and check its expectations");
    rep->add_option("example", repro_example, "waring | r3 | r4")->required();
    rep->add_option("--seed", repro_seed, "Base seed (default: DECOUPLER_SEED or 42)");
    rep->add_option("--output", repro_output, "Report JSON path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return kExitInputError;
    }

    if (dec->parsed()) {
        return cmd_decouple(dargs);
    }
    if (exp->parsed()) {
        return cmd_expand(expand_model, expand_output);
    }
    if (rep->parsed()) {
        return cmd_reproduce(repro_example, repro_seed, repro_output);
    }
    return kExitInputError;
}
