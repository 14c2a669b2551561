#pragma once

#include "decoupler/cpd.hpp"
#include "decoupler/dataset.hpp"
#include "decoupler/factors.hpp"
#include "decoupler/model.hpp"
#include "decoupler/polynomial.hpp"
#include "decoupler/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace decoupler {

enum class Method { jacobian, hessian, joint };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// Sub-seed offsets; all pipeline randomness derives from one base seed.
inline constexpr std::uint64_t kSolverSeedOffset = 1000;
inline constexpr std::uint64_t kValidationSeedOffset = 2000;
inline constexpr int kValidationPoints = 500;

struct DecoupleConfig {
    int rank = 1;
    int degree = 3;
    Method method = Method::joint;
    CpdConfig cpd;
    SamplingConfig sampling;

    void validate() const;
};

struct DecoupleReport {
    DecoupledModel model;
    FactorSet factors;  // normalized solver factors (W, V, Gp?, Gpp?)
    /// Relative Frobenius residuals of the active cost terms.
    std::optional<double> residual_jacobian;
    std::optional<double> residual_hessian;
    /// Per-branch R^2 of the derivative-column fit (second derivatives
    /// when available, first derivatives otherwise).
    std::vector<double> g_fit_r2;
    double validation_rel_error = 0.0;
    std::optional<double> factor_match_W;
    std::optional<double> factor_match_V;
    bool non_unique = false;
    std::vector<std::string> warnings;
    bool converged = false;
    double final_cost = 0.0;
    int restart_index = 0;
    SolverDiagnostics diagnostics;
};

/// Recovers the univariate branch polynomials from normalized factors:
/// per branch the degree>=1 (or >=2 when only second-derivative columns
/// exist) coefficients are fit by least squares to the derivative
/// columns evaluated at z_k = v_i^T x^(k), jointly when both derivative
/// orders are present; the remaining low-order coefficients come from a
/// least-squares solve of F ~ W g(z)^T (minimum-norm along directions W
/// cannot distinguish). Fills r2_out with the per-branch coefficient of
/// determination of the derivative fit when non-null.
std::vector<UnivariatePolynomial> reconstruct_g(const FactorSet& fs, const DerivativeDataset& ds,
                                                int degree, std::vector<double>* r2_out = nullptr);

/// Max over fresh test points of ||f(x) - model(x)|| / (1 + ||f(x)||).
double validate_model(const DecoupledModel& model, const VectorPolynomial& f,
                      const SamplingConfig& test_cfg);

/// Pipeline stages: sample, evaluate derivatives, decompose (per
/// method), normalize, rebuild g, validate.
DecoupleReport decouple_first_order(const VectorPolynomial& f, const DerivativeDataset& ds,
                                    const DecoupleConfig& cfg,
                                    const std::optional<DecoupledModel>& truth = std::nullopt);
DecoupleReport decouple_second_order(const VectorPolynomial& f, const DerivativeDataset& ds,
                                     const DecoupleConfig& cfg,
                                     const std::optional<DecoupledModel>& truth = std::nullopt);
DecoupleReport decouple_joint(const VectorPolynomial& f, const DerivativeDataset& ds,
                              const DecoupleConfig& cfg,
                              const std::optional<DecoupledModel>& truth = std::nullopt);

/// Samples points, builds the dataset and dispatches on cfg.method.
DecoupleReport run_decouple(const VectorPolynomial& f, const DecoupleConfig& cfg,
                            const std::optional<DecoupledModel>& truth = std::nullopt);

}  // namespace decoupler
