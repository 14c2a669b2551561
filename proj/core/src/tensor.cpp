#include "decoupler/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace decoupler {

namespace {

std::size_t checked_product(const std::vector<int>& dims) {
    if (dims.empty()) {
        return 0;
    }
    std::size_t p = 1;
    for (int d : dims) {
        if (d < 1) {
            throw std::invalid_argument("DenseTensor: dimensions must be positive");
        }
        p *= static_cast<std::size_t>(d);
    }
    return p;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> dims)
    : dims_(std::move(dims)), data_(checked_product(dims_), 0.0) {}

DenseTensor::DenseTensor(std::vector<int> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    if (checked_product(dims_) != data_.size()) {
        throw std::invalid_argument("DenseTensor: data length does not match dimensions");
    }
}

std::size_t DenseTensor::flat_index(std::initializer_list<int> idx) const {
    if (idx.size() != dims_.size()) {
        throw std::invalid_argument("DenseTensor: index arity mismatch");
    }
    std::size_t flat = 0;
    std::size_t k = 0;
    for (int i : idx) {
        if (i < 0 || i >= dims_[k]) {
            throw std::out_of_range("DenseTensor: index out of range");
        }
        flat = flat * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(i);
        ++k;
    }
    return flat;
}

double DenseTensor::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) {
        s += v * v;
    }
    return std::sqrt(s);
}

double DenseTensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool DenseTensor::has_nan() const {
    return std::any_of(data_.begin(), data_.end(), [](double v) { return std::isnan(v); });
}

DenseTensor DenseTensor::operator-(const DenseTensor& other) const {
    if (dims_ != other.dims_) {
        throw std::invalid_argument("DenseTensor: dimension mismatch in subtraction");
    }
    DenseTensor out(dims_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out.data_[i] = data_[i] - other.data_[i];
    }
    return out;
}

bool FactorSet::has_tag(const std::string& tag) const {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

const Eigen::MatrixXd& FactorSet::by_tag(const std::string& tag) const {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] == tag) {
            return factors[i];
        }
    }
    throw std::invalid_argument("FactorSet: no factor tagged '" + tag + "'");
}

void FactorSet::check_consistent() const {
    if (factors.size() != tags.size()) {
        throw std::invalid_argument("FactorSet: factor/tag count mismatch");
    }
    for (const auto& f : factors) {
        if (f.cols() != factors.front().cols()) {
            throw std::invalid_argument("FactorSet: factors disagree on column count");
        }
    }
    for (std::size_t i = 0; i < tags.size(); ++i) {
        for (std::size_t j = i + 1; j < tags.size(); ++j) {
            if (tags[i] == tags[j] && factors[i] != factors[j]) {
                throw std::invalid_argument("FactorSet: factors tagged '" + tags[i] + "' differ");
            }
        }
    }
}

Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("khatri_rao: column count mismatch");
    }
    const Eigen::Index p = a.rows();
    const Eigen::Index q = b.rows();
    Eigen::MatrixXd out(p * q, a.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        for (Eigen::Index i = 0; i < p; ++i) {
            out.block(i * q, c, q, 1) = a(i, c) * b.col(c);
        }
    }
    return out;
}

Eigen::MatrixXd khatri_rao_others(const std::vector<Eigen::MatrixXd>& factors, int skip) {
    const int order = static_cast<int>(factors.size());
    if (skip < 0 || skip >= order) {
        throw std::invalid_argument("khatri_rao_others: mode out of range");
    }
    Eigen::MatrixXd acc;
    bool started = false;
    for (int mode = order - 1; mode >= 0; --mode) {
        if (mode == skip) {
            continue;
        }
        if (!started) {
            acc = factors[static_cast<std::size_t>(mode)];
            started = true;
        } else {
            acc = khatri_rao(acc, factors[static_cast<std::size_t>(mode)]);
        }
    }
    if (!started) {
        // Order-1 decomposition: the "others" product is the 1 x R row of ones.
        acc = Eigen::MatrixXd::Ones(1, factors.front().cols());
    }
    return acc;
}

Eigen::MatrixXd unfold(const DenseTensor& t, int mode) {
    const int order = t.order();
    if (mode < 0 || mode >= order) {
        throw std::invalid_argument("unfold: mode " + std::to_string(mode) + " out of range for order "
                                    + std::to_string(order));
    }
    const auto& dims = t.dims();
    const std::size_t rows = static_cast<std::size_t>(dims[static_cast<std::size_t>(mode)]);
    const std::size_t cols = t.size() / rows;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));

    // Column strides: lowest-numbered remaining mode varies fastest.
    std::vector<std::size_t> stride(dims.size(), 0);
    std::size_t s = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (static_cast<int>(k) == mode) {
            continue;
        }
        stride[k] = s;
        s *= static_cast<std::size_t>(dims[k]);
    }

    std::vector<int> idx(dims.size(), 0);
    const auto& data = t.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (static_cast<int>(k) != mode) {
                col += static_cast<std::size_t>(idx[k]) * stride[k];
            }
        }
        out(idx[static_cast<std::size_t>(mode)], static_cast<Eigen::Index>(col)) = data[flat];
        // advance row-major multi-index (last index fastest)
        for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < dims[static_cast<std::size_t>(k)]) {
                break;
            }
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

DenseTensor fold(const Eigen::MatrixXd& mat, int mode, const std::vector<int>& dims) {
    DenseTensor out(dims);
    const int order = out.order();
    if (mode < 0 || mode >= order) {
        throw std::invalid_argument("fold: mode out of range");
    }
    if (mat.rows() != dims[static_cast<std::size_t>(mode)]
        || static_cast<std::size_t>(mat.rows()) * static_cast<std::size_t>(mat.cols()) != out.size()) {
        throw std::invalid_argument("fold: matrix shape does not match target dimensions");
    }

    std::vector<std::size_t> stride(dims.size(), 0);
    std::size_t s = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (static_cast<int>(k) == mode) {
            continue;
        }
        stride[k] = s;
        s *= static_cast<std::size_t>(dims[k]);
    }

    std::vector<int> idx(dims.size(), 0);
    auto& data = out.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (static_cast<int>(k) != mode) {
                col += static_cast<std::size_t>(idx[k]) * stride[k];
            }
        }
        data[flat] = mat(idx[static_cast<std::size_t>(mode)], static_cast<Eigen::Index>(col));
        for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < dims[static_cast<std::size_t>(k)]) {
                break;
            }
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

DenseTensor reconstruct(const std::vector<Eigen::MatrixXd>& factors) {
    if (factors.empty()) {
        throw std::invalid_argument("reconstruct: no factors");
    }
    std::vector<int> dims;
    dims.reserve(factors.size());
    for (const auto& f : factors) {
        if (f.cols() != factors.front().cols()) {
            throw std::invalid_argument("reconstruct: factors disagree on column count");
        }
        dims.push_back(static_cast<int>(f.rows()));
    }
    const Eigen::MatrixXd z = khatri_rao_others(factors, 0);
    const Eigen::MatrixXd m0 = factors.front() * z.transpose();
    return fold(m0, 0, dims);
}

DenseTensor reconstruct(const FactorSet& fs) {
    fs.check_consistent();
    return reconstruct(fs.factors);
}

}  // namespace decoupler
