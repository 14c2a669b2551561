#include "decoupler/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace decoupler {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) {
        s = splitmix64(sm);
    }
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double Rng::normal() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    double u1 = uniform01();
    while (u1 == 0.0) {
        u1 = uniform01();
    }
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
}

SamplingConfig SamplingConfig::box(int num_points, double lo, double hi, int dims, std::uint64_t seed) {
    SamplingConfig cfg;
    cfg.num_points = num_points;
    cfg.lo = Eigen::VectorXd::Constant(dims, lo);
    cfg.hi = Eigen::VectorXd::Constant(dims, hi);
    cfg.seed = seed;
    return cfg;
}

Eigen::MatrixXd sample_points(const SamplingConfig& cfg, int num_vars) {
    if (cfg.num_points < 1) {
        throw std::invalid_argument("sample_points: num_points must be >= 1");
    }
    Eigen::VectorXd lo = cfg.lo;
    Eigen::VectorXd hi = cfg.hi;
    if (lo.size() == 1 && num_vars > 1) {
        lo = Eigen::VectorXd::Constant(num_vars, lo[0]);
        hi = Eigen::VectorXd::Constant(num_vars, hi[0]);
    }
    if (lo.size() != num_vars || hi.size() != num_vars) {
        throw std::invalid_argument("sample_points: bounds dimension mismatch");
    }
    for (int j = 0; j < num_vars; ++j) {
        if (!(lo[j] < hi[j])) {
            throw std::invalid_argument("sample_points: require lo < hi elementwise");
        }
    }
    Rng rng(cfg.seed);
    Eigen::MatrixXd x(cfg.num_points, num_vars);
    for (int k = 0; k < cfg.num_points; ++k) {
        for (int j = 0; j < num_vars; ++j) {
            x(k, j) = rng.uniform(lo[j], hi[j]);
        }
    }
    return x;
}

}  // namespace decoupler
