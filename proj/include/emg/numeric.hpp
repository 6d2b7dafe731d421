#pragma once

// Exact integer/rational arithmetic used by the combinatorial constructions.
// Block lengths grow geometrically with the block index, so quantities easily
// exceed 10^1000; every window sum and block condition is evaluated on exact
// big integers and only converted to double at the measure/transport boundary.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace emg {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline double to_double(const BigRat& q) { return q.template convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.template convert_to<double>(); }

// num/den as a double for integers of any magnitude: both are shifted into
// floating range first (no gcd, no overflow).
inline double ratio_double(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::invalid_argument("ratio with zero denominator");
    if (num == 0) return 0.0;
    const bool neg = (num < 0) != (den < 0);
    const BigInt anum = abs(num), aden = abs(den);
    const long top = static_cast<long>(std::max(msb(anum), msb(aden)));
    const long sh = std::max<long>(0, top - 500);
    const double n = to_double(BigInt(anum >> static_cast<unsigned>(sh)));
    const double d = to_double(BigInt(aden >> static_cast<unsigned>(sh)));
    if (d == 0.0) return neg ? -HUGE_VAL : HUGE_VAL;
    return neg ? -(n / d) : n / d;
}

inline BigRat make_rat(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return BigRat(num, den);
}

// Exact conversion: every finite double is a dyadic rational.
inline BigRat rat_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value is not rational");
    return BigRat(x);
}

inline BigInt big_pow(BigInt base, unsigned exp) {
    BigInt r = 1;
    while (exp) {
        if (exp & 1u) r *= base;
        base *= base;
        exp >>= 1u;
    }
    return r;
}

// Largest k with k^3 <= n (n >= 0). Newton iteration on big integers.
inline BigInt icbrt(const BigInt& n) {
    if (n < 0) throw std::invalid_argument("icbrt of negative value");
    if (n == 0) return 0;
    BigInt x = BigInt(1) << static_cast<unsigned>((msb(n) / 3) + 1);
    while (true) {
        BigInt y = (2 * x + n / (x * x)) / 3;
        if (y >= x) break;
        x = y;
    }
    while (x * x * x > n) --x;
    while ((x + 1) * (x + 1) * (x + 1) <= n) ++x;
    return x;
}

inline BigInt isqrt_big(const BigInt& n) {
    if (n < 0) throw std::invalid_argument("isqrt of negative value");
    return boost::multiprecision::sqrt(n);
}

// gcd/lcm for plain machine integers used by period bookkeeping.
inline std::int64_t lcm64(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0) return 0;
    return a / std::gcd(a, b) * b;
}

inline std::string rat_to_string(const BigRat& q) {
    return q.str();
}

}  // namespace emg
