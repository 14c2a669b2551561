#pragma once

#include "decoupler/polynomial.hpp"
#include "decoupler/sampling.hpp"
#include "decoupler/tensor.hpp"

#include <Eigen/Dense>

namespace decoupler {

/// Function, Jacobian and Hessian evaluations of f at N sample points.
/// Mode order is (output n, input m, [input m,] sample N); the Hessian
/// slices are exactly symmetric in the two input modes.
struct DerivativeDataset {
    Eigen::MatrixXd X;  // N x m sample points (one row per point)
    Eigen::MatrixXd F;  // n x N function values
    DenseTensor J;      // n x m x N
    DenseTensor H;      // n x m x m x N

    int num_outputs() const { return static_cast<int>(F.rows()); }
    int num_inputs() const { return static_cast<int>(X.cols()); }
    int num_points() const { return static_cast<int>(X.rows()); }
};

DerivativeDataset build_dataset(const VectorPolynomial& f, const Eigen::MatrixXd& x);

/// Drops a leading unit mode: (1, d1, ..., dk) -> (d1, ..., dk). Used
/// for the single-output Jacobian matrix and Hessian tensor.
DenseTensor squeeze_leading(const DenseTensor& t);

}  // namespace decoupler
