#include "decoupler/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace decoupler {

namespace {

struct Point {
    double step = 0.0;
    double cost = 0.0;
    double slope = 0.0;  // directional derivative along the search direction
    Eigen::VectorXd x;
    Eigen::VectorXd grad;
};

/// Minimizer of the cubic through (a.step, a.cost, a.slope) and
/// (b.step, b.cost, b.slope); falls back to bisection when degenerate.
double cubic_interpolate(const Point& a, const Point& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.cost - b.cost) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
        const double t =
            b.step - (b.step - a.step) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
        const double lo = std::min(a.step, b.step);
        const double hi = std::max(a.step, b.step);
        const double margin = 0.1 * (hi - lo);
        if (std::isfinite(t) && t > lo + margin && t < hi - margin) {
            return t;
        }
    }
    return 0.5 * (a.step + b.step);
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& opts) {
    const Eigen::Index dim = x0.size();
    LbfgsResult result;
    result.x = std::move(x0);

    Eigen::VectorXd grad(dim);
    double cost = objective(result.x, grad);
    result.cost_trace.push_back(cost);

    std::deque<Eigen::VectorXd> s_hist;
    std::deque<Eigen::VectorXd> y_hist;
    std::deque<double> rho_hist;

    const auto converged_at = [&](double c, const Eigen::VectorXd& g) {
        return c <= opts.cost_floor || g.norm() <= opts.grad_tol * (1.0 + std::abs(c));
    };

    bool tried_sd_restart = false;
    int stalled = 0;
    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        if (cost <= opts.cost_floor || grad.norm() == 0.0 || stalled >= opts.stall_iters) {
            break;
        }

        // Two-loop recursion for the search direction.
        Eigen::VectorXd dir = -grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            const auto ui = static_cast<std::size_t>(i);
            alpha[ui] = rho_hist[ui] * s_hist[ui].dot(dir);
            dir -= alpha[ui] * y_hist[ui];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            dir *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(dir);
            dir += (alpha[i] - beta) * s_hist[i];
        }

        double slope0 = grad.dot(dir);
        if (!(slope0 < 0.0)) {
            dir = -grad;  // curvature info unusable, fall back to steepest descent
            slope0 = grad.dot(dir);
            if (!(slope0 < 0.0)) {
                break;  // gradient has underflowed to zero
            }
        }

        // Strong-Wolfe line search (bracket + zoom, cubic steps).
        Point p0{0.0, cost, slope0, result.x, grad};
        const double dir_norm = dir.norm();
        double trial_step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(dir_norm, 1e-12)) : 1.0;
        const double max_step = 1e10;

        const auto eval = [&](double step) {
            Point p;
            p.step = step;
            p.x = result.x + step * dir;
            p.grad.resize(dim);
            p.cost = objective(p.x, p.grad);
            p.slope = p.grad.dot(dir);
            return p;
        };

        Point prev = p0;
        Point accepted;
        bool have_accepted = false;
        int evals = 0;

        auto zoom = [&](Point lo, Point hi) {
            for (; evals < opts.max_line_search; ++evals) {
                if (std::abs(hi.step - lo.step) * dir_norm
                    < 1e-16 * (1.0 + result.x.norm())) {
                    break;  // interval collapsed to rounding noise
                }
                Point pj = eval(cubic_interpolate(lo, hi));
                if (pj.cost > p0.cost + opts.wolfe_c1 * pj.step * slope0 || pj.cost >= lo.cost) {
                    hi = std::move(pj);
                    continue;
                }
                if (std::abs(pj.slope) <= -opts.wolfe_c2 * slope0) {
                    accepted = std::move(pj);
                    have_accepted = true;
                    return;
                }
                if (pj.slope * (hi.step - lo.step) >= 0.0) {
                    hi = lo;
                }
                lo = std::move(pj);
            }
            if (lo.step > 0.0 && lo.cost < p0.cost) {
                accepted = std::move(lo);  // sufficient decrease without curvature
                have_accepted = true;
            }
        };

        for (; evals < opts.max_line_search; ++evals) {
            Point pt = eval(trial_step);
            if (pt.cost > p0.cost + opts.wolfe_c1 * pt.step * slope0
                || (evals > 0 && pt.cost >= prev.cost)) {
                zoom(prev, std::move(pt));
                break;
            }
            if (std::abs(pt.slope) <= -opts.wolfe_c2 * slope0) {
                accepted = std::move(pt);
                have_accepted = true;
                break;
            }
            if (pt.slope >= 0.0) {
                zoom(std::move(pt), prev);
                break;
            }
            if (pt.step >= max_step) {
                accepted = std::move(pt);
                have_accepted = true;
                break;
            }
            prev = pt;
            trial_step = std::min(2.0 * pt.step, max_step);
        }

        if (!have_accepted) {
            if (!tried_sd_restart && !s_hist.empty()) {
                // Discard curvature history and retry from steepest descent.
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                tried_sd_restart = true;
                continue;
            }
            break;  // no descent possible at this precision
        }
        tried_sd_restart = false;

        Eigen::VectorXd s = accepted.x - result.x;
        Eigen::VectorXd y = accepted.grad - grad;
        const double sy = s.dot(y);
        if (sy > 1e-300) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        result.x = std::move(accepted.x);
        grad = std::move(accepted.grad);
        cost = accepted.cost;
        result.cost_trace.push_back(cost);
    }

    result.cost = cost;
    result.grad_norm = grad.norm();
    result.iterations = iter;
    result.converged = result.converged || converged_at(cost, grad);
    return result;
}

}  // namespace decoupler
