#pragma once

#include "decoupler/polynomial.hpp"

#include <Eigen/Dense>

#include <vector>

namespace decoupler {

/// Decoupled representation f(x) = W g(V^T x): a linear mix W of
/// univariate polynomials g_i applied to the linear forms v_i^T x.
struct DecoupledModel {
    Eigen::MatrixXd W;  // n x r
    Eigen::MatrixXd V;  // m x r
    std::vector<UnivariatePolynomial> g;  // r branches

    int num_outputs() const { return static_cast<int>(W.rows()); }
    int num_inputs() const { return static_cast<int>(V.rows()); }
    int rank() const { return static_cast<int>(g.size()); }

    /// Throws if column counts and branch count disagree.
    void check_consistent() const;

    /// y = W g(V^T x)
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

/// Canonical form: every V column has unit Euclidean norm and positive
/// first nonzero entry; the absorbed scale s reparametrizes the branch
/// as g_i(s z). W is left untouched. Expansion is invariant.
DecoupledModel normalize_model(const DecoupledModel& model);

/// Substitutes z_i = v_i^T x into g_i, scales by W and collects terms.
/// All arithmetic is exact (doubles are lifted to dyadic rationals).
VectorPolynomial expand_decoupled(const DecoupledModel& model);

}  // namespace decoupler
