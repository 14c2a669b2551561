#include "decoupler/joint_cpd.hpp"

#include "decoupler/lbfgs.hpp"
#include "solver_internal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decoupler {

namespace {

/// Shape and weighting of one joint problem instance.
struct Structure {
    bool has_w = false;  // tensors carry the leading output mode
    bool use_j = false;
    bool use_h = false;
    int n = 1;
    int m = 0;
    int num_samples = 0;
    int rank = 0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

struct Factors {
    Eigen::MatrixXd w;    // n x R, absent when !has_w
    Eigen::MatrixXd v;    // m x R
    Eigen::MatrixXd gp;   // N x R, absent when !use_j
    Eigen::MatrixXd gpp;  // N x R, absent when !use_h

    std::vector<Eigen::MatrixXd> jacobian_modes(const Structure& st) const {
        if (st.has_w) {
            return {w, v, gp};
        }
        return {v, gp};
    }
    std::vector<Eigen::MatrixXd> hessian_modes(const Structure& st) const {
        if (st.has_w) {
            return {w, v, v, gpp};
        }
        return {v, v, gpp};
    }
};

Eigen::Index pack_size(const Structure& st) {
    Eigen::Index sz = static_cast<Eigen::Index>(st.m) * st.rank;
    if (st.has_w) {
        sz += static_cast<Eigen::Index>(st.n) * st.rank;
    }
    if (st.use_j) {
        sz += static_cast<Eigen::Index>(st.num_samples) * st.rank;
    }
    if (st.use_h) {
        sz += static_cast<Eigen::Index>(st.num_samples) * st.rank;
    }
    return sz;
}

Eigen::VectorXd pack(const Structure& st, const Factors& f) {
    Eigen::VectorXd x(pack_size(st));
    Eigen::Index off = 0;
    const auto put = [&](const Eigen::MatrixXd& mat) {
        x.segment(off, mat.size()) = Eigen::Map<const Eigen::VectorXd>(mat.data(), mat.size());
        off += mat.size();
    };
    if (st.has_w) {
        put(f.w);
    }
    put(f.v);
    if (st.use_j) {
        put(f.gp);
    }
    if (st.use_h) {
        put(f.gpp);
    }
    return x;
}

Factors unpack(const Structure& st, const Eigen::VectorXd& x) {
    Factors f;
    Eigen::Index off = 0;
    const auto take = [&](int rows) {
        Eigen::MatrixXd mat =
            Eigen::Map<const Eigen::MatrixXd>(x.data() + off, rows, st.rank);
        off += static_cast<Eigen::Index>(rows) * st.rank;
        return mat;
    };
    if (st.has_w) {
        f.w = take(st.n);
    }
    f.v = take(st.m);
    if (st.use_j) {
        f.gp = take(st.num_samples);
    }
    if (st.use_h) {
        f.gpp = take(st.num_samples);
    }
    return f;
}

/// Weighted cost and gradient of the joint objective.
double cost_and_gradient(const Structure& st, const DenseTensor& jac, const DenseTensor& hess,
                         const Eigen::VectorXd& x, Eigen::VectorXd& grad_out) {
    const Factors f = unpack(st, x);
    double cost = 0.0;
    Eigen::MatrixXd gw = st.has_w ? Eigen::MatrixXd::Zero(st.n, st.rank) : Eigen::MatrixXd();
    Eigen::MatrixXd gv = Eigen::MatrixXd::Zero(st.m, st.rank);
    Eigen::MatrixXd ggp;
    Eigen::MatrixXd ggpp;

    if (st.use_j) {
        const auto modes = f.jacobian_modes(st);
        const DenseTensor resid = reconstruct(modes) - jac;
        const double nrm = resid.frobenius_norm();
        cost += st.alpha1 * nrm * nrm;
        const double c = 2.0 * st.alpha1;
        int mode = 0;
        if (st.has_w) {
            gw.noalias() += c * unfold(resid, mode) * khatri_rao_others(modes, mode);
            ++mode;
        }
        gv.noalias() += c * unfold(resid, mode) * khatri_rao_others(modes, mode);
        ++mode;
        ggp = c * unfold(resid, mode) * khatri_rao_others(modes, mode);
    }

    if (st.use_h) {
        const auto modes = f.hessian_modes(st);
        const DenseTensor resid = reconstruct(modes) - hess;
        const double nrm = resid.frobenius_norm();
        cost += st.alpha2 * nrm * nrm;
        const double c = 2.0 * st.alpha2;
        int mode = 0;
        if (st.has_w) {
            gw.noalias() += c * unfold(resid, mode) * khatri_rao_others(modes, mode);
            ++mode;
        }
        // V occupies two modes; both partials accumulate.
        gv.noalias() += c * unfold(resid, mode) * khatri_rao_others(modes, mode);
        gv.noalias() += c * unfold(resid, mode + 1) * khatri_rao_others(modes, mode + 1);
        mode += 2;
        ggpp = c * unfold(resid, mode) * khatri_rao_others(modes, mode);
    }

    Factors g;
    g.w = std::move(gw);
    g.v = std::move(gv);
    g.gp = std::move(ggp);
    g.gpp = std::move(ggpp);
    grad_out = pack(st, g);
    return cost;
}

/// Least-squares update of the factor at `mode` given the others.
Eigen::MatrixXd solve_factor(const DenseTensor& t, const std::vector<Eigen::MatrixXd>& modes,
                             int mode, bool* regularized) {
    const Eigen::MatrixXd z = khatri_rao_others(modes, mode);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(z.cols(), z.cols());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (static_cast<int>(k) != mode) {
            gram.array() *= (modes[k].transpose() * modes[k]).array();
        }
    }
    return internal::solve_gram(gram, unfold(t, mode) * z, regularized);
}

/// Geometric-mean merge of the two V-slot factors of an unconstrained
/// decomposition of H; signs and residual scale are re-absorbed by the
/// subsequent least-squares factor solves.
Eigen::MatrixXd symmetrize_columns(const Eigen::MatrixXd& b, const Eigen::MatrixXd& c, Rng& rng) {
    Eigen::MatrixXd v(b.rows(), b.cols());
    for (Eigen::Index i = 0; i < b.cols(); ++i) {
        const double nb = b.col(i).norm();
        const double nc = c.col(i).norm();
        if (nb == 0.0 || nc == 0.0) {
            v.col(i) = internal::random_matrix(rng, static_cast<int>(b.rows()), 1);
            continue;
        }
        const double sigma = b.col(i).dot(c.col(i)) >= 0.0 ? 1.0 : -1.0;
        Eigen::VectorXd u = b.col(i) / nb + sigma * c.col(i) / nc;
        if (u.norm() < 1e-12) {
            u = b.col(i) / nb;
        }
        v.col(i) = u / u.norm() * std::sqrt(nb * nc);
    }
    return v;
}

Factors initialize(const Structure& st, const DenseTensor& jac, const DenseTensor& hess,
                   const CpdConfig& cfg, std::uint64_t seed, bool prefer_h, bool* regularized) {
    CpdConfig als_cfg;
    als_cfg.rank = st.rank;
    als_cfg.max_iters = std::min(cfg.max_iters, 500);
    als_cfg.tol = std::max(cfg.tol, 1e-14);
    als_cfg.restarts = 1;
    als_cfg.seed = seed;

    Rng rng(seed ^ 0x5DEECE66DULL);
    Factors f;
    const bool h_init = st.use_h && (prefer_h || !st.use_j || jac.order() < 3);
    if (h_init) {
        const CpdResult als = cpd_als(hess, als_cfg);
        const auto& fac = als.factors.factors;
        if (st.has_w) {
            f.w = fac[0];
            f.v = symmetrize_columns(fac[1], fac[2], rng);
            f.gpp = solve_factor(hess, {f.w, f.v, f.v, fac[3]}, 3, regularized);
            f.w = solve_factor(hess, {f.w, f.v, f.v, f.gpp}, 0, regularized);
        } else {
            f.v = symmetrize_columns(fac[0], fac[1], rng);
            f.gpp = solve_factor(hess, {f.v, f.v, fac[2]}, 2, regularized);
        }
        if (st.use_j) {
            std::vector<Eigen::MatrixXd> jm = st.has_w
                ? std::vector<Eigen::MatrixXd>{f.w, f.v, Eigen::MatrixXd::Zero(st.num_samples, st.rank)}
                : std::vector<Eigen::MatrixXd>{f.v, Eigen::MatrixXd::Zero(st.num_samples, st.rank)};
            f.gp = solve_factor(jac, jm, static_cast<int>(jm.size()) - 1, regularized);
        }
    } else {
        const CpdResult als = cpd_als(jac, als_cfg);
        const auto& fac = als.factors.factors;
        int mode = 0;
        if (st.has_w) {
            f.w = fac[static_cast<std::size_t>(mode++)];
        }
        f.v = fac[static_cast<std::size_t>(mode++)];
        f.gp = fac[static_cast<std::size_t>(mode)];
        if (st.use_h) {
            std::vector<Eigen::MatrixXd> hm = st.has_w
                ? std::vector<Eigen::MatrixXd>{f.w, f.v, f.v, Eigen::MatrixXd::Zero(st.num_samples, st.rank)}
                : std::vector<Eigen::MatrixXd>{f.v, f.v, Eigen::MatrixXd::Zero(st.num_samples, st.rank)};
            f.gpp = solve_factor(hess, hm, static_cast<int>(hm.size()) - 1, regularized);
        }
    }
    return f;
}

void check_hessian_symmetry(const DenseTensor& hess, bool has_w) {
    const int mode_a = has_w ? 1 : 0;
    const auto& dims = hess.dims();
    const int m = dims[static_cast<std::size_t>(mode_a)];
    const double scale = std::max(1.0, hess.max_abs());
    const int n = has_w ? dims[0] : 1;
    const int num_samples = dims.back();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            for (int k = j + 1; k < m; ++k) {
                for (int s = 0; s < num_samples; ++s) {
                    const double a = has_w ? hess(i, j, k, s) : hess(j, k, s);
                    const double b = has_w ? hess(i, k, j, s) : hess(k, j, s);
                    if (std::abs(a - b) > 1e-12 * scale) {
                        throw std::invalid_argument(
                            "joint_cpd: Hessian tensor is asymmetric in its two input modes");
                    }
                }
            }
        }
    }
}

}  // namespace

CpdResult joint_cpd(const DenseTensor& jac, const DenseTensor& hess, const CpdConfig& cfg) {
    cfg.validate();

    Structure st;
    st.rank = cfg.rank;
    st.alpha1 = cfg.alpha1.value_or(-1.0);
    st.alpha2 = cfg.alpha2.value_or(-1.0);
    // Auto weights: 1/||T||_F^2 per active term, dropping absent tensors.
    if (!cfg.alpha1) {
        const double nrm = jac.empty() ? 0.0 : jac.frobenius_norm();
        st.alpha1 = nrm > 0.0 ? 1.0 / (nrm * nrm) : 0.0;
    }
    if (!cfg.alpha2) {
        const double nrm = hess.empty() ? 0.0 : hess.frobenius_norm();
        st.alpha2 = nrm > 0.0 ? 1.0 / (nrm * nrm) : 0.0;
    }
    st.use_j = st.alpha1 > 0.0;
    st.use_h = st.alpha2 > 0.0;

    if (st.use_j && jac.empty()) {
        throw std::invalid_argument("joint_cpd: alpha1 > 0 but no Jacobian tensor given");
    }
    if (st.use_h && hess.empty()) {
        throw std::invalid_argument("joint_cpd: alpha2 > 0 but no Hessian tensor given");
    }
    if (st.use_j && jac.has_nan()) {
        throw std::invalid_argument("joint_cpd: Jacobian tensor contains NaN");
    }
    if (st.use_h && hess.has_nan()) {
        throw std::invalid_argument("joint_cpd: Hessian tensor contains NaN");
    }

    const bool zero_data = (!st.use_j || jac.frobenius_norm() == 0.0)
                           && (!st.use_h || hess.frobenius_norm() == 0.0);

    // Infer shapes; the degenerate single-term cases follow the tensor order.
    if (st.use_j && (jac.order() < 2 || jac.order() > 3)) {
        throw std::invalid_argument("joint_cpd: Jacobian tensor must have order 2 or 3");
    }
    if (st.use_h && (hess.order() < 3 || hess.order() > 4)) {
        throw std::invalid_argument("joint_cpd: Hessian tensor must have order 3 or 4");
    }
    if (st.use_j && st.use_h) {
        if (jac.order() - 2 != hess.order() - 3) {
            throw std::invalid_argument("joint_cpd: tensor orders disagree on the output mode");
        }
    }
    st.has_w = st.use_j ? jac.order() == 3 : hess.order() == 4;
    if (st.use_j) {
        const auto& d = jac.dims();
        st.n = st.has_w ? d[0] : 1;
        st.m = st.has_w ? d[1] : d[0];
        st.num_samples = d.back();
    }
    if (st.use_h) {
        const auto& d = hess.dims();
        const int n = st.has_w ? d[0] : 1;
        const int m = st.has_w ? d[1] : d[0];
        const int m2 = st.has_w ? d[2] : d[1];
        if (m != m2) {
            throw std::invalid_argument("joint_cpd: Hessian input modes differ in size");
        }
        if (st.use_j && (n != st.n || m != st.m || d.back() != st.num_samples)) {
            throw std::invalid_argument("joint_cpd: Jacobian/Hessian dimensions disagree");
        }
        st.n = n;
        st.m = m;
        st.num_samples = d.back();
        check_hessian_symmetry(hess, st.has_w);
    }

    CpdResult result;
    result.factors.tags.clear();
    const auto push_factor = [&](const std::string& tag, Eigen::MatrixXd mat) {
        result.factors.tags.push_back(tag);
        result.factors.factors.push_back(std::move(mat));
    };

    if (zero_data) {
        if (st.has_w) {
            push_factor("W", Eigen::MatrixXd::Zero(st.n, st.rank));
        }
        push_factor("V", Eigen::MatrixXd::Zero(st.m, st.rank));
        if (st.use_j) {
            push_factor("Gp", Eigen::MatrixXd::Zero(st.num_samples, st.rank));
        }
        if (st.use_h) {
            push_factor("Gpp", Eigen::MatrixXd::Zero(st.num_samples, st.rank));
        }
        result.final_cost = 0.0;
        result.cost_trace = {0.0};
        result.converged = true;
        return result;
    }

    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        return cost_and_gradient(st, jac, hess, x, grad);
    };

    LbfgsOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.grad_tol = cfg.tol;

    LbfgsResult best;
    Factors best_factors;
    int best_index = -1;
    bool regularized = false;
    for (int k = 0; k < cfg.restarts; ++k) {
        // Alternate the initialization side when both terms are active
        // so restarts explore both basins.
        const bool prefer_h = st.use_h && (!st.use_j || k % 2 == 1);
        const Factors f0 = initialize(st, jac, hess, cfg, cfg.seed + static_cast<std::uint64_t>(k),
                                      prefer_h, &regularized);
        LbfgsResult run = lbfgs_minimize(objective, pack(st, f0), opts);
        result.diagnostics.restart_costs.push_back(run.cost);
        if (best_index < 0 || run.cost < best.cost * (1.0 - 1e-14)) {
            best = std::move(run);
            best_factors = unpack(st, best.x);
            best_index = k;
        }
    }

    if (st.has_w) {
        push_factor("W", best_factors.w);
    }
    push_factor("V", best_factors.v);
    if (st.use_j) {
        push_factor("Gp", best_factors.gp);
    }
    if (st.use_h) {
        push_factor("Gpp", best_factors.gpp);
    }
    result.final_cost = best.cost;
    result.cost_trace = std::move(best.cost_trace);
    result.converged = best.converged;
    result.restart_index = best_index;
    result.diagnostics.regularized = regularized;
    result.diagnostics.iterations = best.iterations;
    result.diagnostics.grad_norm = best.grad_norm;
    result.diagnostics.initial_cost = result.cost_trace.front();
    return result;
}

DenseTensor reconstruct_jacobian_term(const FactorSet& fs) {
    const Eigen::MatrixXd& v = fs.by_tag("V");
    const Eigen::MatrixXd& gp = fs.by_tag("Gp");
    if (fs.has_tag("W")) {
        return reconstruct({fs.by_tag("W"), v, gp});
    }
    return reconstruct({v, gp});
}

DenseTensor reconstruct_hessian_term(const FactorSet& fs) {
    const Eigen::MatrixXd& v = fs.by_tag("V");
    const Eigen::MatrixXd& gpp = fs.by_tag("Gpp");
    if (fs.has_tag("W")) {
        return reconstruct({fs.by_tag("W"), v, v, gpp});
    }
    return reconstruct({v, v, gpp});
}

}  // namespace decoupler
