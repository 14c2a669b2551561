#include "decoupler/dataset.hpp"

#include <stdexcept>

namespace decoupler {

DerivativeDataset build_dataset(const VectorPolynomial& f, const Eigen::MatrixXd& x) {
    const int n = f.num_outputs();
    const int m = f.num_vars();
    if (x.cols() != m) {
        throw std::invalid_argument("build_dataset: sample matrix has " + std::to_string(x.cols())
                                    + " columns, function expects " + std::to_string(m));
    }
    const int num_points = static_cast<int>(x.rows());

    DerivativeDataset ds;
    ds.X = x;
    ds.F.resize(n, num_points);
    ds.J = DenseTensor({n, m, num_points});
    ds.H = DenseTensor({n, m, m, num_points});

    for (int k = 0; k < num_points; ++k) {
        const Eigen::VectorXd point = x.row(k).transpose();
        ds.F.col(k) = evaluate(f, point);
        const Eigen::MatrixXd jac = jacobian_at(f, point);
        const std::vector<Eigen::MatrixXd> hess = hessian_at(f, point);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
                ds.J(i, j, k) = jac(i, j);
                for (int l = 0; l < m; ++l) {
                    ds.H(i, j, l, k) = hess[static_cast<std::size_t>(i)](j, l);
                }
            }
        }
    }
    return ds;
}

DenseTensor squeeze_leading(const DenseTensor& t) {
    if (t.order() < 2 || t.dim(0) != 1) {
        throw std::invalid_argument("squeeze_leading: leading mode is not of size 1");
    }
    std::vector<int> dims(t.dims().begin() + 1, t.dims().end());
    return DenseTensor(std::move(dims), t.data());
}

}  // namespace decoupler
