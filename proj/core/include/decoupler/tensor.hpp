#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <string>
#include <vector>

namespace decoupler {

/// Dense N-way tensor, row-major flat storage (first index slowest).
class DenseTensor {
  public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<int> dims);
    DenseTensor(std::vector<int> dims, std::vector<double> data);

    bool empty() const { return dims_.empty(); }
    int order() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    int dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
    std::size_t size() const { return data_.size(); }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    template <typename... Is>
    double& operator()(Is... is) {
        return data_[flat_index({static_cast<int>(is)...})];
    }
    template <typename... Is>
    double operator()(Is... is) const {
        return data_[flat_index({static_cast<int>(is)...})];
    }

    std::size_t flat_index(std::initializer_list<int> idx) const;

    double frobenius_norm() const;
    double max_abs() const;
    bool has_nan() const;

    DenseTensor operator-(const DenseTensor& other) const;

  private:
    std::vector<int> dims_;
    std::vector<double> data_;
};

/// Ordered per-mode factor matrices with sharing tags: factors with the
/// same tag are constrained equal (V appears twice in a Hessian-style
/// decomposition). All factors share the column count R.
struct FactorSet {
    std::vector<Eigen::MatrixXd> factors;
    std::vector<std::string> tags;

    int rank() const { return factors.empty() ? 0 : static_cast<int>(factors.front().cols()); }
    int order() const { return static_cast<int>(factors.size()); }

    bool has_tag(const std::string& tag) const;
    const Eigen::MatrixXd& by_tag(const std::string& tag) const;

    void check_consistent() const;
};

/// Columnwise Kronecker product; column i is kron(a_i, b_i) with the B
/// index varying fastest.
Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Khatri-Rao chain over modes `hi-1 .. lo` excluding `skip`, highest
/// mode first, so the lowest participating mode varies fastest. This is
/// the matrix Z with unfold(T, skip) = A_skip * Z^T for T = [[A_0..]].
Eigen::MatrixXd khatri_rao_others(const std::vector<Eigen::MatrixXd>& factors, int skip);

/// Mode-n matricization with dim(mode) rows; among the remaining modes
/// the lowest-numbered one varies fastest along columns.
Eigen::MatrixXd unfold(const DenseTensor& t, int mode);

/// Inverse of unfold: fold(unfold(t, mode), mode, t.dims()) == t exactly.
DenseTensor fold(const Eigen::MatrixXd& mat, int mode, const std::vector<int>& dims);

/// T = sum_i outer(a_i, b_i, c_i, ...) over the factor columns.
DenseTensor reconstruct(const std::vector<Eigen::MatrixXd>& factors);
DenseTensor reconstruct(const FactorSet& fs);

}  // namespace decoupler
