#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace decoupler {

/// Limited-memory BFGS with a strong-Wolfe line search. Used by the
/// joint decomposition to minimize the weighted two-tensor cost with a
/// factor appearing in two modes, which block-coordinate updates cannot
/// handle.
struct LbfgsOptions {
    int max_iters = 2000;
    /// Converged when ||grad|| <= grad_tol * (1 + cost). Optimization
    /// continues past this point (until the stall or floor tests fire)
    /// so the returned iterate sits at the numerical floor rather than
    /// just inside the tolerance.
    double grad_tol = 1e-12;
    /// Treat cost <= cost_floor as a numerical zero and stop.
    double cost_floor = 0.0;
    /// Stop after this many accepted steps without meaningful decrease.
    int stall_iters = 10;
    int history = 10;
    int max_line_search = 60;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double cost = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> cost_trace;  // cost after each accepted step, non-increasing
};

/// objective(x, grad) returns the cost and fills grad (always non-null).
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& opts);

}  // namespace decoupler
