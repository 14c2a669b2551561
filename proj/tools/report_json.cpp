#include "report_json.hpp"

#include <decoupler/model.hpp>

#include <sstream>

namespace decoupler_cli {

using decoupler::JsonWriter;

void write_run_metadata(JsonWriter& w, const RunMetadata& meta) {
    w.begin_object();
    w.key("method").value(meta.method);
    w.key("rank").value(meta.rank);
    w.key("degree").value(meta.degree);
    w.key("samples").value(meta.samples);
    w.key("lo").value(meta.lo);
    w.key("hi").value(meta.hi);
    w.key("seed").value(meta.seed);
    w.key("alpha1");
    if (meta.alpha1) {
        w.value(*meta.alpha1);
    } else {
        w.value("auto");
    }
    w.key("alpha2");
    if (meta.alpha2) {
        w.value(*meta.alpha2);
    } else {
        w.value("auto");
    }
    w.key("restarts").value(meta.restarts);
    w.key("max_iters").value(meta.max_iters);
    w.key("tol").value(meta.tol);
    // Stage sub-seeds derived from the base seed.
    w.key("seeds").begin_object();
    w.key("sampling").value(meta.seed);
    w.key("solver").value(meta.seed + decoupler::kSolverSeedOffset);
    w.key("validation").value(meta.seed + decoupler::kValidationSeedOffset);
    w.end_object();
    w.end_object();
}

namespace {

void write_optional(JsonWriter& w, const std::optional<double>& v) {
    if (v) {
        w.value(*v);
    } else {
        w.null();
    }
}

void write_model(JsonWriter& w, const decoupler::DecoupledModel& m) {
    w.begin_object();
    w.key("W").begin_array();
    for (Eigen::Index r = 0; r < m.W.rows(); ++r) {
        w.begin_array();
        for (Eigen::Index c = 0; c < m.W.cols(); ++c) {
            w.value(m.W(r, c));
        }
        w.end_array();
    }
    w.end_array();
    w.key("V").begin_array();
    for (Eigen::Index r = 0; r < m.V.rows(); ++r) {
        w.begin_array();
        for (Eigen::Index c = 0; c < m.V.cols(); ++c) {
            w.value(m.V(r, c));
        }
        w.end_array();
    }
    w.end_array();
    w.key("g").begin_array();
    for (const auto& g : m.g) {
        w.begin_object();
        w.key("coeffs").begin_array();
        for (double c : g.coeffs) {
            w.value(c);
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

}  // namespace

std::string report_to_json(const decoupler::DecoupleReport& report, const RunMetadata& meta) {
    JsonWriter w;
    w.begin_object();
    w.key("run");
    write_run_metadata(w, meta);

    w.key("results").begin_object();
    w.key("tensor_residuals").begin_object();
    w.key("jacobian");
    write_optional(w, report.residual_jacobian);
    w.key("hessian");
    write_optional(w, report.residual_hessian);
    w.end_object();
    w.key("g_fit_r2").begin_array();
    for (double r2 : report.g_fit_r2) {
        w.value(r2);
    }
    w.end_array();
    w.key("validation_rel_error").value(report.validation_rel_error);
    w.key("factor_match_W");
    write_optional(w, report.factor_match_W);
    w.key("factor_match_V");
    write_optional(w, report.factor_match_V);
    w.key("non_unique").value(report.non_unique);
    w.key("warnings").begin_array();
    for (const auto& warning : report.warnings) {
        w.value(warning);
    }
    w.end_array();
    w.end_object();

    w.key("solver").begin_object();
    w.key("converged").value(report.converged);
    w.key("final_cost").value(report.final_cost);
    w.key("initial_cost").value(report.diagnostics.initial_cost);
    w.key("iterations").value(report.diagnostics.iterations);
    w.key("grad_norm").value(report.diagnostics.grad_norm);
    w.key("restart_index").value(report.restart_index);
    w.key("regularized").value(report.diagnostics.regularized);
    w.key("restart_costs").begin_array();
    for (double c : report.diagnostics.restart_costs) {
        w.value(c);
    }
    w.end_array();
    w.end_object();

    w.key("model");
    write_model(w, report.model);
    w.end_object();
    return w.str() + "\n";
}

std::string report_summary(const decoupler::DecoupleReport& report, const RunMetadata& meta) {
    std::ostringstream out;
    out << "method=" << meta.method << " rank=" << meta.rank << " degree=" << meta.degree
        << " samples=" << meta.samples << " seed=" << meta.seed << "\n";
    if (report.residual_jacobian) {
        out << "  jacobian residual (rel): " << JsonWriter::format_double(*report.residual_jacobian)
            << "\n";
    }
    if (report.residual_hessian) {
        out << "  hessian residual (rel):  " << JsonWriter::format_double(*report.residual_hessian)
            << "\n";
    }
    out << "  validation error (rel):  " << JsonWriter::format_double(report.validation_rel_error)
        << "\n";
    if (report.factor_match_W) {
        out << "  factor match W: " << JsonWriter::format_double(*report.factor_match_W) << "\n";
    }
    if (report.factor_match_V) {
        out << "  factor match V: " << JsonWriter::format_double(*report.factor_match_V) << "\n";
    }
    out << "  g fit r^2:";
    for (double r2 : report.g_fit_r2) {
        out << " " << JsonWriter::format_double(r2);
    }
    out << "\n  solver: " << (report.converged ? "converged" : "NOT converged")
        << ", final cost " << JsonWriter::format_double(report.final_cost) << ", restart "
        << report.restart_index << "\n";
    for (const auto& warning : report.warnings) {
        out << "  warning: " << warning << "\n";
    }
    return out.str();
}

}  // namespace decoupler_cli
