#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace mvf {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Base class for all engine errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text; `offset` is the byte position of the failure.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t off)
        : Error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
    std::size_t offset;
};

/// Operation applied to incompatible charts or non-normalized fields.
struct ChartError : Error {
    using Error::Error;
};

/// Floating-point evaluation hit a singularity (division by zero, log of a
/// non-positive value, ...) and retries were exhausted.
struct EvalError : Error {
    using Error::Error;
};

inline Rational rational_of(long long n) { return Rational(n); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline std::optional<long long> to_long(const Rational& r) {
    if (!is_integer(r)) return std::nullopt;
    BigInt n = numerator(r);
    if (n > std::numeric_limits<long long>::max() || n < std::numeric_limits<long long>::min())
        return std::nullopt;
    return static_cast<long long>(n);
}

/// Exact square root of a rational if it is a perfect square.
inline std::optional<Rational> rational_sqrt(const Rational& r) {
    if (r < 0) return std::nullopt;
    BigInt n = numerator(r), d = denominator(r);
    BigInt sn = sqrt(n), sd = sqrt(d);
    if (sn * sn != n || sd * sd != d) return std::nullopt;
    return Rational(sn, sd);
}

inline std::string rational_str(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

}  // namespace mvf
