#pragma once

#include "decoupler/tensor.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace decoupler {

/// Result of matching the columns of two factor matrices.
struct FactorMatch {
    /// Minimum absolute cosine over the optimally matched column pairs;
    /// 1 means the factors agree up to column scaling and permutation.
    double score = 0.0;
    /// perm[i] is the column of B matched to column i of A.
    std::vector<int> perm;
};

/// Scaling/permutation-invariant factor comparison. Exhaustive over
/// permutations for R <= 8, Hungarian-style sum assignment on -|cos|
/// beyond that. A zero column scores 0 for any pairing.
FactorMatch factor_match(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Canonicalizes a decoupling factor set, tags "W", "V" and optionally
/// "Gp" (first derivatives) and "Gpp" (second derivatives):
///  - V columns scaled to unit norm with positive first nonzero entry;
///    the signed scale s multiplies Gp by s and Gpp by s^2;
///  - W columns scaled to unit norm; the scale multiplies Gp and Gpp;
///  - columns sorted by descending W column norm, ties broken by
///    ascending lexicographic order of V columns.
/// Reconstruction from the set is unchanged; the operation is
/// idempotent (near-unit scales are snapped so re-normalizing is a
/// bitwise no-op). Throws on zero columns, naming the column.
FactorSet normalize_factors(const FactorSet& fs);

}  // namespace decoupler
