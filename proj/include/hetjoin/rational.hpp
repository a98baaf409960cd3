#pragma once

#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace hetjoin {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r);

// Parses "a", "-a" or "a/b".
Rational parse_rational(const std::string& text);

// Largest integer x >= 0 with x^k <= value. value must be nonnegative, k >= 1.
BigInt integer_root_floor(const BigInt& value, unsigned k);

// base^exponent when the result is rational, nullopt otherwise. base >= 0.
std::optional<Rational> exact_pow(const Rational& base, const Rational& exponent);

// Smallest power of two >= value, returned as its exponent (may be negative).
// value must be positive.
int ceil_log2(const Rational& value);
int ceil_log2(double value);

// 2^e as a rational; e may be negative.
Rational pow2(int e);

// Ceiling of a rational as a 64-bit integer.
long long ceil_to_int(const Rational& r);

}  // namespace hetjoin
