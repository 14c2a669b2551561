#include "decoupler/model.hpp"

#include <stdexcept>
#include <string>

namespace decoupler {

void DecoupledModel::check_consistent() const {
    const auto r = static_cast<Eigen::Index>(g.size());
    if (W.cols() != r || V.cols() != r) {
        throw std::invalid_argument("DecoupledModel: W/V column counts must equal the branch count "
                                    + std::to_string(g.size()));
    }
    if (W.rows() < 1 || V.rows() < 1 || r < 1) {
        throw std::invalid_argument("DecoupledModel: empty dimensions");
    }
}

Eigen::VectorXd DecoupledModel::operator()(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = V.transpose() * x;
    Eigen::VectorXd gz(rank());
    for (int i = 0; i < rank(); ++i) {
        gz[i] = g[static_cast<std::size_t>(i)](z[i]);
    }
    return W * gz;
}

DecoupledModel normalize_model(const DecoupledModel& model) {
    model.check_consistent();
    DecoupledModel out = model;
    for (int i = 0; i < out.rank(); ++i) {
        const double norm = out.V.col(i).norm();
        if (norm == 0.0) {
            throw std::invalid_argument("normalize_model: V column " + std::to_string(i) + " is zero");
        }
        double s = norm;
        for (Eigen::Index j = 0; j < out.V.rows(); ++j) {
            if (out.V(j, i) != 0.0) {
                if (out.V(j, i) < 0.0) {
                    s = -s;
                }
                break;
            }
        }
        if (s == 1.0) {
            continue;
        }
        out.V.col(i) /= s;
        // g_i(z) <- g_i(s z)
        auto& coeffs = out.g[static_cast<std::size_t>(i)].coeffs;
        double pw = 1.0;
        for (auto& c : coeffs) {
            c *= pw;
            pw *= s;
        }
    }
    return out;
}

VectorPolynomial expand_decoupled(const DecoupledModel& model) {
    model.check_consistent();
    const int n = model.num_outputs();
    const int m = model.num_inputs();
    const int r = model.rank();

    VectorPolynomial f;
    f.outputs.assign(static_cast<std::size_t>(n), MultiPolynomial(m));

    for (int i = 0; i < r; ++i) {
        // linear form z_i = v_i^T x
        MultiPolynomial lin(m);
        for (int j = 0; j < m; ++j) {
            Exponents e(static_cast<std::size_t>(m), 0);
            e[static_cast<std::size_t>(j)] = 1;
            lin.add_term(e, rational_from_double(model.V(j, i)));
        }
        // branch_i = sum_k g_coeff[k] * lin^k
        const auto& coeffs = model.g[static_cast<std::size_t>(i)].coeffs;
        MultiPolynomial branch(m);
        MultiPolynomial power(m);
        power.add_term(Exponents(static_cast<std::size_t>(m), 0), Rational(1));
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            if (k > 0) {
                power = power * lin;
            }
            if (coeffs[k] != 0.0) {
                branch += power * rational_from_double(coeffs[k]);
            }
        }
        for (int row = 0; row < n; ++row) {
            if (model.W(row, i) != 0.0) {
                f.outputs[static_cast<std::size_t>(row)] += branch * rational_from_double(model.W(row, i));
            }
        }
    }
    return f;
}

}  // namespace decoupler
