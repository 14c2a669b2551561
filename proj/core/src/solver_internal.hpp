#pragma once

#include "decoupler/sampling.hpp"

#include <Eigen/Dense>

namespace decoupler::internal {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols);

/// Solves X * gram = rhs for X with a ridge fallback on rank-deficient
/// normal equations; sets *regularized when the ridge was applied.
Eigen::MatrixXd solve_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs, bool* regularized);

}  // namespace decoupler::internal
