#include "decoupler/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace decoupler {

namespace {

Eigen::MatrixXd abs_cosine_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::Index r = a.cols();
    Eigen::MatrixXd cos(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const double na = a.col(i).norm();
        for (Eigen::Index j = 0; j < r; ++j) {
            const double nb = b.col(j).norm();
            cos(i, j) = (na == 0.0 || nb == 0.0) ? 0.0 : std::abs(a.col(i).dot(b.col(j))) / (na * nb);
        }
    }
    return cos;
}

/// O(R^3) Hungarian algorithm minimizing total cost.
std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    continue;
                }
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)]
                                   - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> perm(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        perm[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
    return perm;
}

}  // namespace

FactorMatch factor_match(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("factor_match: shape mismatch");
    }
    const int r = static_cast<int>(a.cols());
    if (r == 0) {
        throw std::invalid_argument("factor_match: empty matrices");
    }
    const Eigen::MatrixXd cos = abs_cosine_matrix(a, b);

    FactorMatch best;
    if (r <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(r));
        std::iota(perm.begin(), perm.end(), 0);
        best.score = -1.0;
        do {
            double lo = 1.0;
            for (int i = 0; i < r; ++i) {
                lo = std::min(lo, cos(i, perm[static_cast<std::size_t>(i)]));
            }
            if (lo > best.score) {
                best.score = lo;
                best.perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        best.perm = hungarian_min_cost(-cos);
        best.score = 1.0;
        for (int i = 0; i < r; ++i) {
            best.score = std::min(best.score, cos(i, best.perm[static_cast<std::size_t>(i)]));
        }
    }
    return best;
}

namespace {

/// Treat scales within a few ulps of 1 as exactly 1 so that
/// normalizing an already-canonical set is a bitwise no-op.
double snap_unit(double s) {
    return std::abs(s - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon() ? 1.0 : s;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            return a[i] < b[i];
        }
    }
    return false;
}

}  // namespace

FactorSet normalize_factors(const FactorSet& fs) {
    fs.check_consistent();
    if (!fs.has_tag("V")) {
        throw std::invalid_argument("normalize_factors: factor set lacks a 'V' factor");
    }
    for (const auto& tag : fs.tags) {
        if (tag != "W" && tag != "V" && tag != "Gp" && tag != "Gpp") {
            throw std::invalid_argument("normalize_factors: unsupported factor tag '" + tag + "'");
        }
    }
    Eigen::MatrixXd w = fs.has_tag("W") ? fs.by_tag("W") : Eigen::MatrixXd();
    Eigen::MatrixXd v = fs.by_tag("V");
    Eigen::MatrixXd gp = fs.has_tag("Gp") ? fs.by_tag("Gp") : Eigen::MatrixXd();
    Eigen::MatrixXd gpp = fs.has_tag("Gpp") ? fs.by_tag("Gpp") : Eigen::MatrixXd();

    const int r = static_cast<int>(v.cols());
    for (int i = 0; i < r; ++i) {
        double s = v.col(i).norm();
        if (s == 0.0) {
            throw std::invalid_argument("normalize_factors: zero column at index " + std::to_string(i)
                                        + " in factor 'V'");
        }
        for (Eigen::Index j = 0; j < v.rows(); ++j) {
            if (v(j, i) != 0.0) {
                if (v(j, i) < 0.0) {
                    s = -s;
                }
                break;
            }
        }
        s = snap_unit(s);
        double sw = 1.0;
        if (w.size() > 0) {
            sw = w.col(i).norm();
            if (sw == 0.0) {
                throw std::invalid_argument("normalize_factors: zero column at index "
                                            + std::to_string(i) + " in factor 'W'");
            }
            sw = snap_unit(sw);
        }
        if (s != 1.0) {
            v.col(i) /= s;
        }
        if (sw != 1.0) {
            w.col(i) /= sw;
        }
        const double gp_scale = s * sw;
        const double gpp_scale = s * s * sw;
        if (gp.size() > 0 && gp_scale != 1.0) {
            gp.col(i) *= gp_scale;
        }
        if (gpp.size() > 0 && gpp_scale != 1.0) {
            gpp.col(i) *= gpp_scale;
        }
    }

    // Canonical column order. W columns are unit-norm at this point, so
    // the norm key only separates sets without a W factor; the V
    // lexicographic key is the effective tie-break.
    std::vector<int> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (w.size() > 0) {
            const double na = w.col(a).norm();
            const double nb = w.col(b).norm();
            if (na != nb) {
                return na > nb;
            }
        }
        if (lex_less(v.col(a), v.col(b))) {
            return true;
        }
        if (lex_less(v.col(b), v.col(a))) {
            return false;
        }
        return false;
    });

    const bool identity = std::is_sorted(order.begin(), order.end());
    auto permute = [&](Eigen::MatrixXd& mat) {
        if (mat.size() == 0 || identity) {
            return;
        }
        Eigen::MatrixXd tmp(mat.rows(), mat.cols());
        for (int i = 0; i < r; ++i) {
            tmp.col(i) = mat.col(order[static_cast<std::size_t>(i)]);
        }
        mat = std::move(tmp);
    };
    permute(w);
    permute(v);
    permute(gp);
    permute(gpp);

    FactorSet out = fs;
    for (std::size_t k = 0; k < out.tags.size(); ++k) {
        if (out.tags[k] == "W") {
            out.factors[k] = w;
        } else if (out.tags[k] == "V") {
            out.factors[k] = v;
        } else if (out.tags[k] == "Gp") {
            out.factors[k] = gp;
        } else if (out.tags[k] == "Gpp") {
            out.factors[k] = gpp;
        }
    }
    return out;
}

}  // namespace decoupler
