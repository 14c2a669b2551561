#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace decoupler {

/// Arbitrary-precision rational used for all symbolic coefficient
/// arithmetic. Values cross into `double` only at evaluation and
/// serialization boundaries.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("rational_from_double: non-finite value");
    }
    if (x == 0.0) {
        return Rational(0);
    }
    int exp = 0;
    double mant = std::frexp(x, &exp);  // x = mant * 2^exp, 0.5 <= |mant| < 1
    // 53 doublings make the mantissa integral.
    auto mant_int = static_cast<std::int64_t>(std::ldexp(mant, 53));
    exp -= 53;
    Rational q(mant_int);
    if (exp > 0) {
        q *= Rational(BigInt(1) << exp);
    } else if (exp < 0) {
        q /= Rational(BigInt(1) << (-exp));
    }
    return q;
}

inline double rational_to_double(const Rational& q) {
    return q.convert_to<double>();
}

/// Exact rational from decimal text: digits [. digits] [e|E [sign] digits].
/// "0.1" becomes 1/10, not the nearest double.
Rational rational_from_decimal_string(const std::string& text);

}  // namespace decoupler
