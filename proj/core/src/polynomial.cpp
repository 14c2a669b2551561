#include "decoupler/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace decoupler {

bool GradedLexDesc::operator()(const Exponents& a, const Exponents& b) const {
    const int da = std::accumulate(a.begin(), a.end(), 0);
    const int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) {
        return da > db;
    }
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

int MultiPolynomial::degree() const {
    if (terms_.empty()) {
        return -1;
    }
    // First key has the highest total degree under graded-lex-desc order.
    const Exponents& e = terms_.begin()->first;
    return std::accumulate(e.begin(), e.end(), 0);
}

void MultiPolynomial::add_term(const Exponents& exp, const Rational& c) {
    if (static_cast<int>(exp.size()) != num_vars_) {
        throw std::invalid_argument("MultiPolynomial::add_term: exponent tuple length mismatch");
    }
    for (int e : exp) {
        if (e < 0) {
            throw std::invalid_argument("MultiPolynomial::add_term: negative exponent");
        }
    }
    if (c == 0) {
        return;
    }
    auto it = terms_.find(exp);
    if (it == terms_.end()) {
        terms_.emplace(exp, c);
    } else {
        it->second += c;
        if (it->second == 0) {
            terms_.erase(it);
        }
    }
}

MultiPolynomial& MultiPolynomial::operator+=(const MultiPolynomial& other) {
    if (other.num_vars_ != num_vars_) {
        throw std::invalid_argument("MultiPolynomial: variable count mismatch");
    }
    for (const auto& [exp, c] : other.terms_) {
        add_term(exp, c);
    }
    return *this;
}

MultiPolynomial& MultiPolynomial::operator-=(const MultiPolynomial& other) {
    if (other.num_vars_ != num_vars_) {
        throw std::invalid_argument("MultiPolynomial: variable count mismatch");
    }
    for (const auto& [exp, c] : other.terms_) {
        add_term(exp, -c);
    }
    return *this;
}

MultiPolynomial MultiPolynomial::operator*(const MultiPolynomial& other) const {
    if (other.num_vars_ != num_vars_) {
        throw std::invalid_argument("MultiPolynomial: variable count mismatch");
    }
    MultiPolynomial out(num_vars_);
    for (const auto& [ea, ca] : terms_) {
        for (const auto& [eb, cb] : other.terms_) {
            Exponents e(num_vars_);
            for (int i = 0; i < num_vars_; ++i) {
                e[i] = ea[i] + eb[i];
            }
            out.add_term(e, ca * cb);
        }
    }
    return out;
}

MultiPolynomial MultiPolynomial::operator*(const Rational& c) const {
    MultiPolynomial out(num_vars_);
    if (c == 0) {
        return out;
    }
    for (const auto& [exp, coef] : terms_) {
        out.add_term(exp, coef * c);
    }
    return out;
}

int VectorPolynomial::num_vars() const {
    if (outputs.empty()) {
        throw std::logic_error("VectorPolynomial: no outputs");
    }
    return outputs.front().num_vars();
}

UnivariatePolynomial UnivariatePolynomial::from_coeffs(std::vector<double> c) {
    while (c.size() > 1 && c.back() == 0.0) {
        c.pop_back();
    }
    if (c.empty()) {
        c.push_back(0.0);
    }
    return UnivariatePolynomial{std::move(c)};
}

int UnivariatePolynomial::degree() const {
    if (coeffs.size() == 1 && coeffs[0] == 0.0) {
        return -1;
    }
    return static_cast<int>(coeffs.size()) - 1;
}

double UnivariatePolynomial::operator()(double z) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

UnivariatePolynomial UnivariatePolynomial::derivative() const {
    if (coeffs.size() <= 1) {
        return zero();
    }
    std::vector<double> d(coeffs.size() - 1);
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        d[k - 1] = coeffs[k] * static_cast<double>(k);
    }
    return from_coeffs(std::move(d));
}

UnivariatePolynomial UnivariatePolynomial::antiderivative(double constant) const {
    std::vector<double> a(coeffs.size() + 1);
    a[0] = constant;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        a[k + 1] = coeffs[k] / static_cast<double>(k + 1);
    }
    return from_coeffs(std::move(a));
}

Rational rational_from_decimal_string(const std::string& text) {
    std::size_t pos = 0;
    bool neg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        neg = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    long frac_len = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        digits.push_back(text[pos++]);
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            digits.push_back(text[pos++]);
            ++frac_len;
        }
    }
    if (digits.empty()) {
        throw std::invalid_argument("rational_from_decimal_string: no digits in '" + text + "'");
    }
    long exp10 = 0;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        bool eneg = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            eneg = text[pos] == '-';
            ++pos;
        }
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
            throw std::invalid_argument("rational_from_decimal_string: malformed exponent in '" + text + "'");
        }
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            exp10 = exp10 * 10 + (text[pos++] - '0');
        }
        if (eneg) {
            exp10 = -exp10;
        }
    }
    if (pos != text.size()) {
        throw std::invalid_argument("rational_from_decimal_string: trailing characters in '" + text + "'");
    }
    BigInt mant(digits);
    Rational q(mant);
    long net = exp10 - frac_len;
    BigInt p10 = 1;
    for (long i = 0; i < std::labs(net); ++i) {
        p10 *= 10;
    }
    if (net > 0) {
        q *= Rational(p10);
    } else if (net < 0) {
        q /= Rational(p10);
    }
    return neg ? Rational(-q) : q;
}

namespace {

struct Parser {
    const std::string& text;
    int num_vars;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("parse_polynomial: " + what + " at position " + std::to_string(pos));
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    long parse_uint() {
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
            fail("expected digit");
        }
        long v = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            v = v * 10 + (text[pos++] - '0');
            if (v > 1'000'000'000L) {
                fail("number too large");
            }
        }
        return v;
    }

    /// Number literal: digits [. digits] [e [sign] digits]
    Rational parse_number() {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (peek() == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t mark = pos;
            ++pos;
            if (peek() == '+' || peek() == '-') {
                ++pos;
            }
            if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                    ++pos;
                }
            } else {
                pos = mark;  // 'e' was not an exponent
            }
        }
        if (pos == start) {
            fail("expected number");
        }
        return rational_from_decimal_string(text.substr(start, pos - start));
    }

    /// Variable factor: x<index>[^<exp>]
    std::pair<int, int> parse_var_factor() {
        ++pos;  // consume 'x'
        std::size_t idx_pos = pos;
        long idx = parse_uint();
        if (idx < 1 || idx > num_vars) {
            pos = idx_pos;
            fail("variable x" + std::to_string(idx) + " out of range (num_vars=" + std::to_string(num_vars)
                 + ")");
        }
        int e = 1;
        skip_ws();
        if (peek() == '^') {
            ++pos;
            skip_ws();
            e = static_cast<int>(parse_uint());
        }
        return {static_cast<int>(idx) - 1, e};
    }

    /// Term: [coefficient ['*']] var_factor ('*' var_factor)*  |  coefficient
    void parse_term(MultiPolynomial& p, bool negate) {
        skip_ws();
        Rational coef(1);
        bool saw_coef = false;
        if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
            coef = parse_number();
            saw_coef = true;
        }
        Exponents exp(static_cast<std::size_t>(num_vars), 0);
        bool saw_var = false;
        for (;;) {
            skip_ws();
            if (saw_coef || saw_var) {
                if (peek() == '*') {
                    ++pos;
                    skip_ws();
                } else if (peek() == 'x') {
                    fail("expected '*' between factors");
                } else {
                    break;
                }
            }
            if (peek() == 'x') {
                auto [var, e] = parse_var_factor();
                exp[static_cast<std::size_t>(var)] += e;
                saw_var = true;
            } else if (!saw_coef && !saw_var) {
                fail("expected coefficient or variable");
            } else {
                fail("expected variable after '*'");
            }
        }
        if (!saw_coef && !saw_var) {
            fail("empty term");
        }
        p.add_term(exp, negate ? Rational(-coef) : coef);
    }
};

}  // namespace

MultiPolynomial parse_polynomial(const std::string& text, int num_vars) {
    MultiPolynomial p(num_vars);
    Parser ps{text, num_vars};
    ps.skip_ws();
    if (ps.pos >= text.size()) {
        ps.fail("empty input");
    }
    bool negate = false;
    if (ps.peek() == '+' || ps.peek() == '-') {
        negate = ps.peek() == '-';
        ++ps.pos;
    }
    ps.parse_term(p, negate);
    while (!ps.at_end()) {
        char op = ps.peek();
        if (op != '+' && op != '-') {
            ps.fail("expected '+' or '-'");
        }
        ++ps.pos;
        ps.parse_term(p, op == '-');
    }
    return p;
}

namespace {

/// Exact digits when the coefficient is an integer, otherwise a
/// 17-significant-digit decimal of the nearest double.
std::string coefficient_to_string(const Rational& c) {
    if (boost::multiprecision::denominator(c) == 1) {
        return boost::multiprecision::numerator(c).str();
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", rational_to_double(c));
    return buf;
}

}  // namespace

std::string to_string(const MultiPolynomial& p) {
    if (p.is_zero()) {
        return "0";
    }
    std::ostringstream out;
    bool first = true;
    for (const auto& [exp, coef] : p.terms()) {
        const bool neg = coef < 0;
        const Rational mag = neg ? Rational(-coef) : coef;
        if (first) {
            if (neg) {
                out << "-";
            }
            first = false;
        } else {
            out << (neg ? " - " : " + ");
        }
        const bool constant = std::all_of(exp.begin(), exp.end(), [](int e) { return e == 0; });
        const bool unit = mag == 1;
        if (!unit || constant) {
            out << coefficient_to_string(mag);
        }
        bool printed_factor = !unit || constant;
        for (std::size_t j = 0; j < exp.size(); ++j) {
            if (exp[j] == 0) {
                continue;
            }
            if (printed_factor) {
                out << "*";
            }
            out << "x" << (j + 1);
            if (exp[j] > 1) {
                out << "^" << exp[j];
            }
            printed_factor = true;
        }
    }
    return out.str();
}

double evaluate(const MultiPolynomial& p, const Eigen::VectorXd& x) {
    if (x.size() != p.num_vars()) {
        throw std::invalid_argument("evaluate: point dimension " + std::to_string(x.size())
                                    + " != num_vars " + std::to_string(p.num_vars()));
    }
    double sum = 0.0;
    for (const auto& [exp, coef] : p.terms()) {
        double term = rational_to_double(coef);
        for (std::size_t j = 0; j < exp.size(); ++j) {
            for (int k = 0; k < exp[j]; ++k) {
                term *= x[static_cast<Eigen::Index>(j)];
            }
        }
        sum += term;
    }
    return sum;
}

Eigen::VectorXd evaluate(const VectorPolynomial& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd y(f.num_outputs());
    for (int i = 0; i < f.num_outputs(); ++i) {
        y[i] = evaluate(f.outputs[static_cast<std::size_t>(i)], x);
    }
    return y;
}

MultiPolynomial differentiate(const MultiPolynomial& p, int var) {
    if (var < 0 || var >= p.num_vars()) {
        throw std::invalid_argument("differentiate: variable index " + std::to_string(var)
                                    + " out of range");
    }
    MultiPolynomial d(p.num_vars());
    for (const auto& [exp, coef] : p.terms()) {
        const int e = exp[static_cast<std::size_t>(var)];
        if (e == 0) {
            continue;
        }
        Exponents de = exp;
        de[static_cast<std::size_t>(var)] = e - 1;
        d.add_term(de, coef * e);
    }
    return d;
}

Eigen::MatrixXd jacobian_at(const VectorPolynomial& f, const Eigen::VectorXd& x) {
    const int n = f.num_outputs();
    const int m = f.num_vars();
    Eigen::MatrixXd jac(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            jac(i, j) = evaluate(differentiate(f.outputs[static_cast<std::size_t>(i)], j), x);
        }
    }
    return jac;
}

std::vector<Eigen::MatrixXd> hessian_at(const VectorPolynomial& f, const Eigen::VectorXd& x) {
    const int n = f.num_outputs();
    const int m = f.num_vars();
    std::vector<Eigen::MatrixXd> hess;
    hess.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd h(m, m);
        for (int j = 0; j < m; ++j) {
            MultiPolynomial dj = differentiate(f.outputs[static_cast<std::size_t>(i)], j);
            for (int k = j; k < m; ++k) {
                const double v = evaluate(differentiate(dj, k), x);
                h(j, k) = v;
                h(k, j) = v;  // mirror, keeps the two entries bitwise equal
            }
        }
        hess.push_back(std::move(h));
    }
    return hess;
}

FdDerivatives fd_check(const VectorPolynomial& f, const Eigen::VectorXd& x, double h) {
    if (h <= 0.0) {
        throw std::invalid_argument("fd_check: step must be positive");
    }
    const int n = f.num_outputs();
    const int m = f.num_vars();
    FdDerivatives out;
    out.jacobian.resize(n, m);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        out.jacobian.col(j) = (evaluate(f, xp) - evaluate(f, xm)) / (2.0 * h);
    }
    out.hessian.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(m, m));
    const Eigen::VectorXd f0 = evaluate(f, x);
    for (int j = 0; j < m; ++j) {
        for (int k = j; k < m; ++k) {
            Eigen::VectorXd est(n);
            if (j == k) {
                Eigen::VectorXd xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                est = (evaluate(f, xp) - 2.0 * f0 + evaluate(f, xm)) / (h * h);
            } else {
                Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
                xpp[j] += h;
                xpp[k] += h;
                xpm[j] += h;
                xpm[k] -= h;
                xmp[j] -= h;
                xmp[k] += h;
                xmm[j] -= h;
                xmm[k] -= h;
                est = (evaluate(f, xpp) - evaluate(f, xpm) - evaluate(f, xmp) + evaluate(f, xmm))
                      / (4.0 * h * h);
            }
            for (int i = 0; i < n; ++i) {
                out.hessian[static_cast<std::size_t>(i)](j, k) = est[i];
                out.hessian[static_cast<std::size_t>(i)](k, j) = est[i];
            }
        }
    }
    return out;
}

}  // namespace decoupler
