#include "decoupler/cpd.hpp"

#include "decoupler/sampling.hpp"
#include "solver_internal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace decoupler {

void CpdConfig::validate() const {
    if (rank < 1) {
        throw std::invalid_argument("CpdConfig: rank must be >= 1");
    }
    if (tol <= 0.0) {
        throw std::invalid_argument("CpdConfig: tol must be positive");
    }
    if (restarts < 1) {
        throw std::invalid_argument("CpdConfig: restarts must be >= 1");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("CpdConfig: max_iters must be >= 1");
    }
    if (alpha1 && *alpha1 < 0.0) {
        throw std::invalid_argument("CpdConfig: alpha1 must be non-negative");
    }
    if (alpha2 && *alpha2 < 0.0) {
        throw std::invalid_argument("CpdConfig: alpha2 must be non-negative");
    }
    if (alpha1 && alpha2 && *alpha1 == 0.0 && *alpha2 == 0.0) {
        throw std::invalid_argument("CpdConfig: alpha1 and alpha2 must not both be zero");
    }
}

namespace internal {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

/// Solves X * gram = rhs for X, adding a ridge when gram is numerically
/// rank-deficient. gram is R x R symmetric positive semidefinite.
Eigen::MatrixXd solve_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs, bool* regularized) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    Eigen::MatrixXd g = gram;
    if (lmax <= 0.0 || lmin < 1e-12 * lmax) {
        const double ridge = 1e-12 * std::max(gram.trace(), 1e-300);
        g.diagonal().array() += ridge;
        if (regularized != nullptr) {
            *regularized = true;
        }
    }
    return g.ldlt().solve(rhs.transpose()).transpose();
}

}  // namespace internal

namespace {

double squared_residual(const DenseTensor& t, const std::vector<Eigen::MatrixXd>& factors) {
    const DenseTensor r = t - reconstruct(factors);
    const double nrm = r.frobenius_norm();
    return nrm * nrm;
}

struct AlsRun {
    std::vector<Eigen::MatrixXd> factors;
    std::vector<double> trace;
    bool converged = false;
    bool regularized = false;
};

AlsRun als_single(const DenseTensor& t, int rank, int max_iters, double tol, std::uint64_t seed,
                  const std::vector<Eigen::MatrixXd>& unfoldings) {
    const int order = t.order();
    Rng rng(seed);
    AlsRun run;
    run.factors.reserve(static_cast<std::size_t>(order));
    for (int mode = 0; mode < order; ++mode) {
        run.factors.push_back(internal::random_matrix(rng, t.dim(mode), rank));
    }
    // Below this cost the residual is rounding noise (relative residual
    // ~1e-13); the relative-change test is meaningless there.
    const double norm = t.frobenius_norm();
    const double floor_cost = (1e-13 * norm) * (1e-13 * norm);
    run.trace.push_back(squared_residual(t, run.factors));
    for (int iter = 0; iter < max_iters; ++iter) {
        for (int mode = 0; mode < order; ++mode) {
            const Eigen::MatrixXd z = khatri_rao_others(run.factors, mode);
            // Gram of the Khatri-Rao product = Hadamard product of factor Grams.
            Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(rank, rank);
            for (int k = 0; k < order; ++k) {
                if (k != mode) {
                    gram.array() *= (run.factors[static_cast<std::size_t>(k)].transpose()
                                     * run.factors[static_cast<std::size_t>(k)])
                                        .array();
                }
            }
            const Eigen::MatrixXd rhs = unfoldings[static_cast<std::size_t>(mode)] * z;
            run.factors[static_cast<std::size_t>(mode)] =
                internal::solve_gram(gram, rhs, &run.regularized);
        }
        const double cost = squared_residual(t, run.factors);
        const double prev = run.trace.back();
        run.trace.push_back(cost);
        if (cost <= floor_cost || std::abs(prev - cost) <= tol * std::max(prev, 1e-300)) {
            run.converged = true;
            break;
        }
    }
    return run;
}

}  // namespace

CpdResult cpd_als(const DenseTensor& t, const CpdConfig& cfg) {
    cfg.validate();
    if (t.order() < 2) {
        throw std::invalid_argument("cpd_als: tensor order must be >= 2");
    }
    if (t.has_nan()) {
        throw std::invalid_argument("cpd_als: input tensor contains NaN");
    }
    for (int mode = 0; mode < t.order(); ++mode) {
        const std::size_t others = t.size() / static_cast<std::size_t>(t.dim(mode));
        if (static_cast<std::size_t>(cfg.rank) > others) {
            throw std::invalid_argument("cpd_als: rank " + std::to_string(cfg.rank)
                                        + " exceeds the mode-" + std::to_string(mode)
                                        + " unfolding width");
        }
    }

    CpdResult result;
    result.factors.tags.reserve(static_cast<std::size_t>(t.order()));
    for (int mode = 0; mode < t.order(); ++mode) {
        result.factors.tags.push_back("mode" + std::to_string(mode));
    }

    if (t.frobenius_norm() == 0.0) {
        for (int mode = 0; mode < t.order(); ++mode) {
            result.factors.factors.emplace_back(Eigen::MatrixXd::Zero(t.dim(mode), cfg.rank));
        }
        result.final_cost = 0.0;
        result.cost_trace = {0.0};
        result.converged = true;
        return result;
    }

    std::vector<Eigen::MatrixXd> unfoldings;
    unfoldings.reserve(static_cast<std::size_t>(t.order()));
    for (int mode = 0; mode < t.order(); ++mode) {
        unfoldings.push_back(unfold(t, mode));
    }

    AlsRun best;
    int best_index = -1;
    for (int k = 0; k < cfg.restarts; ++k) {
        AlsRun run = als_single(t, cfg.rank, cfg.max_iters, cfg.tol, cfg.seed + static_cast<std::uint64_t>(k),
                                unfoldings);
        result.diagnostics.restart_costs.push_back(run.trace.back());
        const double cost = run.trace.back();
        // Strictly lower cost wins; ties within 1e-14 relative keep the
        // earlier restart.
        if (best_index < 0 || cost < best.trace.back() * (1.0 - 1e-14)) {
            best = std::move(run);
            best_index = k;
        }
    }

    result.factors.factors = best.factors;
    result.cost_trace = best.trace;
    result.final_cost = best.trace.back();
    result.converged = best.converged;
    result.restart_index = best_index;
    result.diagnostics.regularized = best.regularized;
    result.diagnostics.iterations = static_cast<int>(best.trace.size()) - 1;
    result.diagnostics.initial_cost = best.trace.front();
    return result;
}

}  // namespace decoupler
