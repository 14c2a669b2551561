#pragma once

#include "decoupler/rational.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace decoupler {

/// Exponent multi-index of a monomial; length equals the variable count.
using Exponents = std::vector<int>;

/// Graded-lexicographic order, descending: higher total degree first,
/// then lexicographically larger exponent tuple first. This is the
/// canonical term order for serialization ("-37*x1^3" before "5*x1").
struct GradedLexDesc {
    bool operator()(const Exponents& a, const Exponents& b) const;
};

/// Exact multivariate polynomial over variables x1..xm.
///
/// Invariants: no stored coefficient is zero; every exponent tuple has
/// length num_vars(). Coefficients are exact rationals; doubles enter
/// and leave through exact dyadic conversion.
class MultiPolynomial {
  public:
    using TermMap = std::map<Exponents, Rational, GradedLexDesc>;

    explicit MultiPolynomial(int num_vars) : num_vars_(num_vars) {
        if (num_vars < 1) {
            throw std::invalid_argument("MultiPolynomial: num_vars must be >= 1");
        }
    }

    int num_vars() const { return num_vars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Total degree; -1 for the zero polynomial.
    int degree() const;

    /// Adds c * x^exp, dropping the term if the sum cancels to zero.
    void add_term(const Exponents& exp, const Rational& c);

    MultiPolynomial& operator+=(const MultiPolynomial& other);
    MultiPolynomial& operator-=(const MultiPolynomial& other);
    MultiPolynomial operator*(const MultiPolynomial& other) const;
    MultiPolynomial operator*(const Rational& c) const;

    bool operator==(const MultiPolynomial& other) const {
        return num_vars_ == other.num_vars_ && terms_ == other.terms_;
    }

  private:
    int num_vars_;
    TermMap terms_;
};

/// Vector-valued polynomial function f : R^m -> R^n.
struct VectorPolynomial {
    std::vector<MultiPolynomial> outputs;

    int num_outputs() const { return static_cast<int>(outputs.size()); }
    int num_vars() const;
};

/// Dense univariate polynomial, coefficients in ascending degree
/// (coeffs[k] multiplies z^k). The zero polynomial is stored as {0}.
struct UnivariatePolynomial {
    std::vector<double> coeffs{0.0};

    static UnivariatePolynomial zero() { return UnivariatePolynomial{}; }
    static UnivariatePolynomial from_coeffs(std::vector<double> c);

    /// -1 for the zero polynomial.
    int degree() const;
    bool is_zero() const { return degree() < 0; }

    double operator()(double z) const;
    UnivariatePolynomial derivative() const;
    /// Antiderivative with the given constant term.
    UnivariatePolynomial antiderivative(double constant = 0.0) const;

    bool operator==(const UnivariatePolynomial& other) const = default;
};

/// Parses the `c*x1^a*x2^b + ...` grammar. Coefficients may be integer
/// or decimal (optionally with an exponent part) and are captured
/// exactly. Throws std::invalid_argument with a byte position on syntax
/// errors and on references to variables beyond num_vars.
MultiPolynomial parse_polynomial(const std::string& text, int num_vars);

/// Canonical text form: graded-lex descending terms, exact integer
/// coefficients where possible, otherwise 17-significant-digit decimals.
/// parse(to_string(p)) reproduces the serialization exactly.
std::string to_string(const MultiPolynomial& p);

double evaluate(const MultiPolynomial& p, const Eigen::VectorXd& x);
Eigen::VectorXd evaluate(const VectorPolynomial& f, const Eigen::VectorXd& x);

/// Exact partial derivative with respect to variable `var` (0-based).
MultiPolynomial differentiate(const MultiPolynomial& p, int var);

/// J[i][j] = d f_i / d x_j evaluated at x; n x m.
Eigen::MatrixXd jacobian_at(const VectorPolynomial& f, const Eigen::VectorXd& x);

/// One m x m symmetric matrix per output; H[i](j,k) = d^2 f_i / dx_j dx_k.
/// The (j,k)/(k,j) entries are bitwise equal.
std::vector<Eigen::MatrixXd> hessian_at(const VectorPolynomial& f, const Eigen::VectorXd& x);

/// Central finite-difference estimates of the Jacobian and Hessian,
/// used to cross-check the symbolic derivatives.
struct FdDerivatives {
    Eigen::MatrixXd jacobian;
    std::vector<Eigen::MatrixXd> hessian;
};
FdDerivatives fd_check(const VectorPolynomial& f, const Eigen::VectorXd& x, double h);

}  // namespace decoupler
