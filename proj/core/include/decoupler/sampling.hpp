#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace decoupler {

/// Self-contained 64-bit generator (splitmix64-seeded xoshiro256**).
/// Keeps sampling byte-reproducible independently of the standard
/// library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (pairs cached).
    double normal();

  private:
    std::uint64_t state_[4];
    bool have_cached_ = false;
    double cached_ = 0.0;
};

/// Uniform i.i.d. sampling box for training/validation points.
struct SamplingConfig {
    int num_points = 200;
    Eigen::VectorXd lo;  // per-dimension lower bounds
    Eigen::VectorXd hi;  // per-dimension upper bounds
    std::uint64_t seed = 42;

    static SamplingConfig box(int num_points, double lo, double hi, int dims, std::uint64_t seed);
};

/// N x m matrix of i.i.d. points, entry (k, j) uniform in [lo_j, hi_j).
/// Deterministic given the seed; rows are filled point by point.
Eigen::MatrixXd sample_points(const SamplingConfig& cfg, int num_vars);

}  // namespace decoupler
