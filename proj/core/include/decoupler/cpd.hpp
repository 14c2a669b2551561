#pragma once

#include "decoupler/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace decoupler {

/// Shared configuration for the ALS and joint solvers.
struct CpdConfig {
    int rank = 1;
    int max_iters = 2000;
    double tol = 1e-12;
    int restarts = 10;
    std::uint64_t seed = 42;
    /// Weights of the two residual terms in the joint cost. Unset means
    /// 1/||T||_F^2 for the corresponding tensor (scale-commensurate).
    std::optional<double> alpha1;
    std::optional<double> alpha2;

    void validate() const;
};

struct SolverDiagnostics {
    bool regularized = false;   // ridge applied to a rank-deficient solve
    int iterations = 0;         // iterations of the winning restart
    double grad_norm = 0.0;     // joint solver only
    double initial_cost = 0.0;  // first cost_trace entry of the winner
    std::vector<double> restart_costs;  // final cost per restart
};

struct CpdResult {
    FactorSet factors;
    double final_cost = 0.0;
    std::vector<double> cost_trace;  // winner's per-iteration cost, non-increasing
    bool converged = false;
    int restart_index = 0;
    SolverDiagnostics diagnostics;
};

/// Unconstrained CP decomposition by alternating least squares; cost is
/// the squared Frobenius residual. Cyclic per-factor linear solves,
/// stopping on relative cost change below tol or max_iters; best of
/// `restarts` seeded random initializations (seed + restart index).
/// Rank-deficient normal equations get a ridge of 1e-12 * trace and are
/// flagged in diagnostics. NaN input throws.
CpdResult cpd_als(const DenseTensor& t, const CpdConfig& cfg);

}  // namespace decoupler
