#include "hetjoin/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace hetjoin {

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational number: '" + text + "'");
  }
}

BigInt integer_root_floor(const BigInt& value, unsigned k) {
  if (value < 0) throw std::invalid_argument("integer_root_floor: negative value");
  if (k == 0) throw std::invalid_argument("integer_root_floor: k must be >= 1");
  if (value < 2 || k == 1) return value;
  // Bisection on [0, 2^(bits/k + 1)].
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(value)) + 1;
  BigInt lo = 0;
  BigInt hi = BigInt(1) << (bits / k + 1);
  while (lo < hi) {
    BigInt mid = (lo + hi + 1) / 2;
    if (boost::multiprecision::pow(mid, k) <= value) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

std::optional<Rational> exact_pow(const Rational& base, const Rational& exponent) {
  if (base < 0) throw std::invalid_argument("exact_pow: negative base");
  const BigInt p = boost::multiprecision::numerator(exponent);
  const BigInt q = boost::multiprecision::denominator(exponent);
  if (base == 0) {
    if (p > 0) return Rational(0);
    if (p == 0) return Rational(1);
    return std::nullopt;
  }
  if (q > 64 || boost::multiprecision::abs(p) > 4096) return std::nullopt;
  const unsigned q_small = q.convert_to<unsigned>();
  const unsigned p_abs = boost::multiprecision::abs(p).convert_to<unsigned>();

  const BigInt a = boost::multiprecision::numerator(base);
  const BigInt b = boost::multiprecision::denominator(base);
  const BigInt ra = integer_root_floor(a, q_small);
  const BigInt rb = integer_root_floor(b, q_small);
  if (boost::multiprecision::pow(ra, q_small) != a) return std::nullopt;
  if (boost::multiprecision::pow(rb, q_small) != b) return std::nullopt;
  Rational root(ra, rb);
  Rational result = 1;
  for (unsigned i = 0; i < p_abs; ++i) result *= root;
  if (p < 0) result = Rational(1) / result;
  return result;
}

int ceil_log2(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("ceil_log2: value must be positive and finite");
  }
  int e = 0;
  const double mantissa = std::frexp(value, &e);  // value = mantissa * 2^e, mantissa in [0.5, 1)
  return mantissa == 0.5 ? e - 1 : e;
}

int ceil_log2(const Rational& value) {
  if (value <= 0) throw std::invalid_argument("ceil_log2: value must be positive");
  int e = ceil_log2(to_double(value));
  // Correct for rounding in the conversion.
  while (pow2(e) < value) ++e;
  while (pow2(e - 1) >= value) --e;
  return e;
}

Rational pow2(int e) {
  if (e >= 0) return Rational(BigInt(1) << e);
  return Rational(BigInt(1), BigInt(1) << (-e));
}

long long ceil_to_int(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  BigInt q = num / den;  // truncates toward zero
  if (q * den != num && num > 0) q += 1;
  return q.convert_to<long long>();
}

}  // namespace hetjoin
