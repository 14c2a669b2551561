#include "decoupler/decouple.hpp"

#include "decoupler/joint_cpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace decoupler {

std::string to_string(Method method) {
    switch (method) {
        case Method::jacobian:
            return "jacobian";
        case Method::hessian:
            return "hessian";
        case Method::joint:
            return "joint";
    }
    throw std::logic_error("to_string(Method): invalid value");
}

Method method_from_string(const std::string& name) {
    if (name == "jacobian") {
        return Method::jacobian;
    }
    if (name == "hessian") {
        return Method::hessian;
    }
    if (name == "joint") {
        return Method::joint;
    }
    throw std::invalid_argument("unknown method '" + name + "' (expected jacobian|hessian|joint)");
}

void DecoupleConfig::validate() const {
    if (rank < 1) {
        throw std::invalid_argument("DecoupleConfig: rank must be >= 1");
    }
    if (degree < 1) {
        throw std::invalid_argument("DecoupleConfig: degree must be >= 1");
    }
    cpd.validate();
}

namespace {

double relative_residual(const DenseTensor& data, const DenseTensor& fit) {
    const double denom = data.frobenius_norm();
    const double num = (data - fit).frobenius_norm();
    if (denom == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / denom;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
    const double ss_res = (y - pred).squaredNorm();
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).matrix().squaredNorm();
    const double scale = std::max(1.0, y.squaredNorm());
    if (ss_tot <= 1e-28 * scale) {
        // Constant target column: call the fit perfect when the
        // residual is at rounding level.
        return ss_res <= 1e-20 * scale ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - ss_res / ss_tot;
}

}  // namespace

std::vector<UnivariatePolynomial> reconstruct_g(const FactorSet& fs, const DerivativeDataset& ds,
                                                int degree, std::vector<double>* r2_out) {
    if (degree < 1) {
        throw std::invalid_argument("reconstruct_g: degree must be >= 1");
    }
    const int num_points = ds.num_points();
    if (num_points < degree + 1) {
        throw std::invalid_argument("reconstruct_g: need at least degree+1 = "
                                    + std::to_string(degree + 1) + " samples, have "
                                    + std::to_string(num_points));
    }
    const Eigen::MatrixXd& v = fs.by_tag("V");
    const Eigen::MatrixXd& w = fs.by_tag("W");
    const bool has_gp = fs.has_tag("Gp");
    const bool has_gpp = fs.has_tag("Gpp");
    if (!has_gp && !has_gpp) {
        throw std::invalid_argument("reconstruct_g: factor set has neither Gp nor Gpp");
    }
    const int rank = static_cast<int>(v.cols());
    const int n = ds.num_outputs();

    // z_ki = v_i^T x^(k)
    const Eigen::MatrixXd z = ds.X * v;  // N x R

    // Stage 1: per branch, fit the derivative-determined coefficients.
    const int lo_p = has_gp ? 1 : 2;  // lowest coefficient index the derivatives constrain
    std::vector<Eigen::VectorXd> coeffs(static_cast<std::size_t>(rank),
                                        Eigen::VectorXd::Zero(degree + 1));
    if (r2_out != nullptr) {
        r2_out->assign(static_cast<std::size_t>(rank), 1.0);
    }
    for (int i = 0; i < rank; ++i) {
        const int unknowns = degree + 1 - lo_p;
        if (unknowns <= 0) {
            continue;  // derivatives constrain nothing (e.g. degree 1 from Hessian only)
        }
        const int rows = (has_gp ? num_points : 0) + (has_gpp ? num_points : 0);
        Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, unknowns);
        Eigen::VectorXd target(rows);
        int row = 0;
        if (has_gp) {
            const Eigen::MatrixXd& gp = fs.by_tag("Gp");
            for (int k = 0; k < num_points; ++k, ++row) {
                double zp = 1.0;  // z^(p-1)
                for (int p = 1; p <= degree; ++p) {
                    if (p >= lo_p) {
                        design(row, p - lo_p) = p * zp;
                    }
                    zp *= z(k, i);
                }
                target[row] = gp(k, i);
            }
        }
        const int gpp_row_begin = row;
        if (has_gpp) {
            const Eigen::MatrixXd& gpp = fs.by_tag("Gpp");
            for (int k = 0; k < num_points; ++k, ++row) {
                double zp = 1.0;  // z^(p-2)
                for (int p = 2; p <= degree; ++p) {
                    design(row, p - lo_p) = p * (p - 1) * zp;
                    zp *= z(k, i);
                }
                target[row] = gpp(k, i);
            }
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < unknowns) {
            throw std::runtime_error("reconstruct_g: Vandermonde system for branch "
                                     + std::to_string(i)
                                     + " is rank-deficient (collinear samples); use more or more "
                                       "spread-out sample points");
        }
        const Eigen::VectorXd sol = qr.solve(target);
        for (int p = lo_p; p <= degree; ++p) {
            coeffs[static_cast<std::size_t>(i)][p] = sol[p - lo_p];
        }
        if (r2_out != nullptr) {
            const int r2_begin = has_gpp ? gpp_row_begin : 0;
            const Eigen::VectorXd pred =
                design.middleRows(r2_begin, num_points) * sol;
            (*r2_out)[static_cast<std::size_t>(i)] =
                r_squared(target.segment(r2_begin, num_points), pred);
        }
    }

    // Stage 2: remaining low-order coefficients from F ~ W g(z)^T.
    std::vector<std::pair<int, int>> free_coeffs;  // (branch, power)
    for (int i = 0; i < rank; ++i) {
        free_coeffs.emplace_back(i, 0);
        if (!has_gp && degree >= 1) {
            free_coeffs.emplace_back(i, 1);
        }
    }
    const int num_free = static_cast<int>(free_coeffs.size());
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n) * num_points, num_free);
    Eigen::VectorXd target(static_cast<Eigen::Index>(n) * num_points);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < num_points; ++k) {
            const Eigen::Index row = static_cast<Eigen::Index>(j) * num_points + k;
            double known = 0.0;
            for (int i = 0; i < rank; ++i) {
                double gi = 0.0;
                double zp = 1.0;
                for (int p = 0; p <= degree; ++p) {
                    gi += coeffs[static_cast<std::size_t>(i)][p] * zp;
                    zp *= z(k, i);
                }
                known += w(j, i) * gi;
            }
            target[row] = ds.F(j, k) - known;
            for (int c = 0; c < num_free; ++c) {
                const auto [i, p] = free_coeffs[static_cast<std::size_t>(c)];
                design(row, c) = w(j, i) * (p == 0 ? 1.0 : z(k, i));
            }
        }
    }
    // Minimum-norm least squares: directions W cannot distinguish (e.g.
    // how a shared constant splits across branches when r > n) get the
    // smallest-coefficient representative.
    const Eigen::VectorXd sol =
        design.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(target);
    for (int c = 0; c < num_free; ++c) {
        const auto [i, p] = free_coeffs[static_cast<std::size_t>(c)];
        coeffs[static_cast<std::size_t>(i)][p] += sol[c];
    }

    std::vector<UnivariatePolynomial> g;
    g.reserve(static_cast<std::size_t>(rank));
    for (int i = 0; i < rank; ++i) {
        g.push_back(UnivariatePolynomial::from_coeffs(std::vector<double>(
            coeffs[static_cast<std::size_t>(i)].data(),
            coeffs[static_cast<std::size_t>(i)].data() + degree + 1)));
    }
    return g;
}

double validate_model(const DecoupledModel& model, const VectorPolynomial& f,
                      const SamplingConfig& test_cfg) {
    model.check_consistent();
    if (model.num_inputs() != f.num_vars() || model.num_outputs() != f.num_outputs()) {
        throw std::invalid_argument("validate_model: dimension mismatch between model and function");
    }
    const Eigen::MatrixXd x = sample_points(test_cfg, f.num_vars());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
        const Eigen::VectorXd point = x.row(k).transpose();
        const Eigen::VectorXd ref = evaluate(f, point);
        const double err = (ref - model(point)).norm() / (1.0 + ref.norm());
        worst = std::max(worst, err);
    }
    return worst;
}

namespace {

CpdConfig solver_config(const DecoupleConfig& cfg) {
    CpdConfig cpd = cfg.cpd;
    cpd.rank = cfg.rank;
    return cpd;
}

/// Shared tail: normalize factors, rebuild g, validate, score.
DecoupleReport finish(const VectorPolynomial& f, const DerivativeDataset& ds,
                      const DecoupleConfig& cfg, const std::optional<DecoupledModel>& truth,
                      CpdResult&& res, FactorSet&& tagged, DecoupleReport&& report) {
    report.factors = normalize_factors(tagged);
    report.model.W = report.factors.by_tag("W");
    report.model.V = report.factors.by_tag("V");
    report.model.g = reconstruct_g(report.factors, ds, cfg.degree, &report.g_fit_r2);

    SamplingConfig test_cfg = cfg.sampling;
    test_cfg.num_points = kValidationPoints;
    test_cfg.seed = cfg.sampling.seed + kValidationSeedOffset;
    report.validation_rel_error = validate_model(report.model, f, test_cfg);

    if (truth) {
        if (truth->rank() == cfg.rank && truth->num_inputs() == ds.num_inputs()
            && truth->num_outputs() == ds.num_outputs()) {
            report.factor_match_W = factor_match(truth->W, report.model.W).score;
            report.factor_match_V = factor_match(truth->V, report.model.V).score;
        } else {
            report.warnings.push_back("ground-truth model shape differs from the requested "
                                      "decomposition; factor match skipped");
        }
    }

    report.converged = res.converged;
    report.final_cost = res.final_cost;
    report.restart_index = res.restart_index;
    report.diagnostics = res.diagnostics;
    return std::move(report);
}

FactorSet with_ones_w(const FactorSet& fs) {
    FactorSet out;
    out.tags.push_back("W");
    out.factors.emplace_back(Eigen::MatrixXd::Ones(1, fs.rank()));
    out.tags.insert(out.tags.end(), fs.tags.begin(), fs.tags.end());
    out.factors.insert(out.factors.end(), fs.factors.begin(), fs.factors.end());
    return out;
}

}  // namespace

DecoupleReport decouple_first_order(const VectorPolynomial& f, const DerivativeDataset& ds,
                                    const DecoupleConfig& cfg,
                                    const std::optional<DecoupledModel>& truth) {
    cfg.validate();
    DecoupleReport report;
    CpdConfig cpd = solver_config(cfg);
    CpdResult res;
    FactorSet tagged;
    if (ds.num_outputs() >= 2) {
        res = cpd_als(ds.J, cpd);
        report.residual_jacobian = relative_residual(ds.J, reconstruct(res.factors));
        tagged.tags = {"W", "V", "Gp"};
        tagged.factors = res.factors.factors;
    } else {
        // Single output: the Jacobian stack is an m x N matrix and its
        // rank factorization is only determined up to an invertible
        // mixing factor.
        report.non_unique = true;
        report.warnings.push_back(
            "single-output first-order decoupling is a matrix factorization without a unique "
            "solution (any invertible mixing of the factors fits equally well); returned factors "
            "are one representative");
        const DenseTensor j2 = squeeze_leading(ds.J);
        res = cpd_als(j2, cpd);
        report.residual_jacobian = relative_residual(j2, reconstruct(res.factors));
        FactorSet vs;
        vs.tags = {"V", "Gp"};
        vs.factors = res.factors.factors;
        tagged = with_ones_w(vs);
    }
    return finish(f, ds, cfg, truth, std::move(res), std::move(tagged), std::move(report));
}

DecoupleReport decouple_second_order(const VectorPolynomial& f, const DerivativeDataset& ds,
                                     const DecoupleConfig& cfg,
                                     const std::optional<DecoupledModel>& truth) {
    cfg.validate();
    DecoupleReport report;
    CpdConfig cpd = solver_config(cfg);
    cpd.alpha1 = 0.0;
    if (!cpd.alpha2 || *cpd.alpha2 == 0.0) {
        cpd.alpha2.reset();  // auto weight
    }
    CpdResult res;
    FactorSet tagged;
    if (ds.num_outputs() >= 2) {
        res = joint_cpd(DenseTensor(), ds.H, cpd);
        report.residual_hessian = relative_residual(ds.H, reconstruct_hessian_term(res.factors));
        tagged = res.factors;
    } else {
        const DenseTensor h3 = squeeze_leading(ds.H);
        res = joint_cpd(DenseTensor(), h3, cpd);
        report.residual_hessian = relative_residual(h3, reconstruct_hessian_term(res.factors));
        tagged = with_ones_w(res.factors);
    }
    return finish(f, ds, cfg, truth, std::move(res), std::move(tagged), std::move(report));
}

DecoupleReport decouple_joint(const VectorPolynomial& f, const DerivativeDataset& ds,
                              const DecoupleConfig& cfg,
                              const std::optional<DecoupledModel>& truth) {
    cfg.validate();
    DecoupleReport report;
    const CpdConfig cpd = solver_config(cfg);
    CpdResult res;
    FactorSet tagged;
    if (ds.num_outputs() >= 2) {
        res = joint_cpd(ds.J, ds.H, cpd);
        if (res.factors.has_tag("Gp")) {
            report.residual_jacobian = relative_residual(ds.J, reconstruct_jacobian_term(res.factors));
        }
        if (res.factors.has_tag("Gpp")) {
            report.residual_hessian = relative_residual(ds.H, reconstruct_hessian_term(res.factors));
        }
        tagged = res.factors;
    } else {
        const DenseTensor j2 = squeeze_leading(ds.J);
        const DenseTensor h3 = squeeze_leading(ds.H);
        res = joint_cpd(j2, h3, cpd);
        if (res.factors.has_tag("Gp")) {
            report.residual_jacobian = relative_residual(j2, reconstruct_jacobian_term(res.factors));
        }
        if (res.factors.has_tag("Gpp")) {
            report.residual_hessian = relative_residual(h3, reconstruct_hessian_term(res.factors));
        }
        tagged = with_ones_w(res.factors);
    }
    return finish(f, ds, cfg, truth, std::move(res), std::move(tagged), std::move(report));
}

DecoupleReport run_decouple(const VectorPolynomial& f, const DecoupleConfig& cfg,
                            const std::optional<DecoupledModel>& truth) {
    cfg.validate();
    const Eigen::MatrixXd x = sample_points(cfg.sampling, f.num_vars());
    const DerivativeDataset ds = build_dataset(f, x);
    switch (cfg.method) {
        case Method::jacobian:
            return decouple_first_order(f, ds, cfg, truth);
        case Method::hessian:
            return decouple_second_order(f, ds, cfg, truth);
        case Method::joint:
            return decouple_joint(f, ds, cfg, truth);
    }
    throw std::logic_error("run_decouple: invalid method");
}

}  // namespace decoupler
